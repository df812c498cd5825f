#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "panolum/common.hpp"
#include "panolum/encoding.hpp"
#include "panolum/linalg.hpp"
#include "panolum/random.hpp"

namespace panolum {

// Two-branch dense net. Branch A encodes the global-illumination features
// (px, py, al, az, dir, dif, avg, skymap), branch B the direct-sun feature
// (sunpatch); their outputs are concatenated into the head, which ends in a
// single output node. ReLU on every layer, the output node included --
// targets live in [0, 1]. An empty branch passes its input through.
struct Architecture {
  std::vector<int> branch_a{600, 600, 600, 600};
  std::vector<int> branch_b{400};
  std::vector<int> head{600};
  bool linear_output = false;  // degenerate configs (least-squares checks)

  int branch_a_out() const {
    return branch_a.empty() ? kBranchAInputs : branch_a.back();
  }
  int branch_b_out() const {
    return branch_b.empty() ? kBranchBInputs : branch_b.back();
  }
  int head_in() const { return branch_a_out() + branch_b_out(); }
  int head_out() const { return head.empty() ? head_in() : head.back(); }
};

inline void validate_architecture(const Architecture& arch) {
  for (const auto* widths : {&arch.branch_a, &arch.branch_b, &arch.head})
    for (int w : *widths)
      if (w < 1)
        throw std::invalid_argument("architecture: layer widths must be >= 1");
}

template <typename T>
struct LayerT {
  int in = 0;
  int out = 0;
  std::vector<T> w;  // out x in, row-major
  std::vector<T> b;  // out
};

using Layer = LayerT<double>;

// Layer order: branch A, branch B, head, output node.
inline std::vector<std::pair<int, int>> layer_shapes(const Architecture& arch) {
  std::vector<std::pair<int, int>> shapes;
  int in = kBranchAInputs;
  for (int w : arch.branch_a) {
    shapes.emplace_back(in, w);
    in = w;
  }
  in = kBranchBInputs;
  for (int w : arch.branch_b) {
    shapes.emplace_back(in, w);
    in = w;
  }
  in = arch.head_in();
  for (int w : arch.head) {
    shapes.emplace_back(in, w);
    in = w;
  }
  shapes.emplace_back(arch.head_out(), 1);
  return shapes;
}

struct ModelMetadata {
  uint64_t seed = 0;
  int epochs_run = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<int> train_indices;
  std::vector<int> validation_indices;
};

struct Model {
  Architecture arch;
  std::vector<Layer> layers;
  EncodingConstants enc;
  DomainBounds bounds;
  AvgMap avg;
  ModelMetadata meta;
};

inline std::size_t count_parameters(const Model& model) {
  std::size_t n = 0;
  for (const auto& l : model.layers) n += l.w.size() + l.b.size();
  return n;
}

// He-normal weights (std = sqrt(2 / fan_in)), zero biases, drawn in layer
// order from one seeded stream.
inline Model init_network(const Architecture& arch, uint64_t seed) {
  validate_architecture(arch);
  Model model;
  model.arch = arch;
  model.meta.seed = seed;
  std::mt19937_64 gen(seed);
  for (auto [in, out] : layer_shapes(arch)) {
    Layer layer;
    layer.in = in;
    layer.out = out;
    layer.w.resize(static_cast<std::size_t>(in) * out);
    layer.b.assign(out, 0.0);
    double stddev = std::sqrt(2.0 / in);
    for (auto& w : layer.w) w = stddev * rng::normal(gen);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

namespace detail {

template <typename T>
void dense_forward(const LayerT<T>& layer, const T* x, std::size_t m, T* y,
                   bool relu) {
  matmul_nt(x, layer.w.data(), y, m, layer.out, layer.in);
  const int out = layer.out;
  for (std::size_t r = 0; r < m; ++r) {
    T* row = y + r * out;
    for (int o = 0; o < out; ++o) {
      T v = row[o] + layer.b[o];
      row[o] = relu ? std::max(T(0), v) : v;
    }
  }
}

}  // namespace detail

// Per-block activation storage; entry [0] of each branch is the input.
template <typename T>
struct ActivationsT {
  std::vector<std::vector<T>> a;
  std::vector<std::vector<T>> b;
  std::vector<std::vector<T>> h;  // h[0] is the concatenated branch output
  std::size_t rows = 0;
};

template <typename T>
void forward_block(const Architecture& arch,
                   const std::vector<LayerT<T>>& layers, const T* xa,
                   const T* xb, std::size_t m, ActivationsT<T>& acts) {
  const std::size_t na = arch.branch_a.size();
  const std::size_t nb = arch.branch_b.size();
  const std::size_t nh = arch.head.size();
  acts.rows = m;
  acts.a.resize(na + 1);
  acts.b.resize(nb + 1);
  acts.h.resize(nh + 2);  // concat, head outputs, network output

  acts.a[0].assign(xa, xa + m * kBranchAInputs);
  for (std::size_t i = 0; i < na; ++i) {
    const auto& layer = layers[i];
    acts.a[i + 1].resize(m * layer.out);
    detail::dense_forward(layer, acts.a[i].data(), m, acts.a[i + 1].data(),
                          true);
  }
  acts.b[0].assign(xb, xb + m * kBranchBInputs);
  for (std::size_t i = 0; i < nb; ++i) {
    const auto& layer = layers[na + i];
    acts.b[i + 1].resize(m * layer.out);
    detail::dense_forward(layer, acts.b[i].data(), m, acts.b[i + 1].data(),
                          true);
  }

  const int wa = arch.branch_a_out();
  const int wb = arch.branch_b_out();
  auto& concat = acts.h[0];
  concat.resize(m * (wa + wb));
  const auto& la = acts.a[na];
  const auto& lb = acts.b[nb];
  for (std::size_t r = 0; r < m; ++r) {
    std::copy_n(&la[r * wa], wa, &concat[r * (wa + wb)]);
    std::copy_n(&lb[r * wb], wb, &concat[r * (wa + wb) + wa]);
  }

  for (std::size_t i = 0; i < nh; ++i) {
    const auto& layer = layers[na + nb + i];
    acts.h[i + 1].resize(m * layer.out);
    detail::dense_forward(layer, acts.h[i].data(), m, acts.h[i + 1].data(),
                          true);
  }
  const auto& out_layer = layers.back();
  acts.h[nh + 1].resize(m);
  detail::dense_forward(out_layer, acts.h[nh].data(), m,
                        acts.h[nh + 1].data(), !arch.linear_output);
}

// Predictions for a feature batch, processed in fixed row blocks.
inline std::vector<double> forward(const Model& model,
                                   const FeatureBatch& batch) {
  std::vector<double> y(batch.rows);
  ActivationsT<double> acts;
  for (std::size_t r0 = 0; r0 < batch.rows; r0 += kGemmChunkRows) {
    std::size_t m = std::min(kGemmChunkRows, batch.rows - r0);
    forward_block(model.arch, model.layers,
                  batch.branch_a.data() + r0 * kBranchAInputs,
                  batch.branch_b.data() + r0, m, acts);
    std::copy_n(acts.h.back().data(), m, y.data() + r0);
  }
  return y;
}

struct LossBreakdown {
  double total = 0.0;
  double mse = 0.0;
  double rer = 0.0;
  bool degenerate = false;  // all-dark batch: sum(omega * t^2) == 0
};

// Solid-angle-weighted composite loss: mse + lambda * rer with
// mse = sum(w (y - t)^2) / sum(w), rer = sqrt(sum(w (y - t)^2) / sum(w t^2)).
// Both are invariant under uniform rescaling of the weights.
inline LossBreakdown loss(const std::vector<double>& pred,
                          const std::vector<double>& target,
                          const std::vector<double>& omega, double lambda) {
  if (pred.size() != target.size() || pred.size() != omega.size() ||
      pred.empty())
    throw std::invalid_argument("loss: size mismatch or empty batch");
  double sum_w = 0.0, err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - target[i];
    sum_w += omega[i];
    err += omega[i] * d * d;
    ref += omega[i] * target[i] * target[i];
  }
  LossBreakdown out;
  out.mse = err / sum_w;
  if (ref > 0.0) {
    out.rer = std::sqrt(err / ref);
  } else {
    out.rer = 0.0;
    out.degenerate = true;
  }
  out.total = out.mse + lambda * out.rer;
  return out;
}

struct Grads {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;
};

inline Grads zero_grads(const Model& model) {
  Grads g;
  g.w.resize(model.layers.size());
  g.b.resize(model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    g.w[i].assign(model.layers[i].w.size(), 0.0);
    g.b[i].assign(model.layers[i].b.size(), 0.0);
  }
  return g;
}

namespace detail {

// delta <- upstream .* relu'(activation); relu' taken as 0 at 0.
inline void apply_relu_mask(const std::vector<double>& activation,
                            std::vector<double>& delta, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!(activation[i] > 0.0)) delta[i] = 0.0;
}

inline void accumulate_bias(const std::vector<double>& delta, std::size_t m,
                            int out, std::vector<double>& db) {
  for (std::size_t r = 0; r < m; ++r)
    for (int o = 0; o < out; ++o) db[o] += delta[r * out + o];
}

struct BackwardScratch {
  std::vector<double> delta;
  std::vector<double> next;
};

// Backprop through one dense stack (input acts[0] .. output acts[n]).
// `delta` enters as dLoss/d(acts[n]) pre-mask and leaves as
// dLoss/d(acts[0]) when propagate_input is set.
inline void backward_stack(const std::vector<Layer>& layers,
                           std::size_t first_layer, std::size_t count,
                           const std::vector<std::vector<double>>& acts,
                           std::size_t acts_offset, std::size_t m,
                           std::vector<double>& delta, Grads& grads,
                           std::vector<double>& scratch, bool mask_top,
                           bool propagate_input) {
  for (std::size_t k = count; k-- > 0;) {
    const Layer& layer = layers[first_layer + k];
    const auto& out_act = acts[acts_offset + k + 1];
    const auto& in_act = acts[acts_offset + k];
    if (k + 1 != count || mask_top)
      apply_relu_mask(out_act, delta, m * layer.out);
    matmul_tn_acc(delta.data(), in_act.data(), grads.w[first_layer + k].data(),
                  m, layer.out, layer.in);
    accumulate_bias(delta, m, layer.out, grads.b[first_layer + k]);
    if (k > 0 || propagate_input) {
      scratch.resize(m * layer.in);
      matmul_nn(delta.data(), layer.w.data(), scratch.data(), m, layer.out,
                layer.in);
      delta.swap(scratch);
    }
  }
}

}  // namespace detail

// Analytic gradient of loss() over a row batch, accumulated in fixed block
// order. Returns the loss of the batch. Activations are kept per block when
// they fit the cache budget, otherwise the forward pass is replayed per
// block during backprop.
inline LossBreakdown gradients(const Model& model, const double* xa,
                               const double* xb, const double* target,
                               const double* omega, std::size_t rows,
                               double lambda, Grads& grads) {
  if (rows == 0) throw std::invalid_argument("gradients: empty batch");
  const Architecture& arch = model.arch;
  const std::size_t na = arch.branch_a.size();
  const std::size_t nb = arch.branch_b.size();
  const std::size_t nh = arch.head.size();
  const std::size_t blocks = (rows + kGemmChunkRows - 1) / kGemmChunkRows;

  std::size_t act_width = kBranchAInputs + kBranchBInputs + arch.head_in();
  for (int w : arch.branch_a) act_width += w;
  for (int w : arch.branch_b) act_width += w;
  for (int w : arch.head) act_width += w;
  constexpr std::size_t kActCacheBudget = 1ull << 28;  // 256 MiB of doubles
  const bool cache_acts =
      rows * act_width * sizeof(double) <= kActCacheBudget;

  std::vector<ActivationsT<double>> cache(cache_acts ? blocks : 1);
  std::vector<double> y(rows);

  for (std::size_t blk = 0; blk < blocks; ++blk) {
    std::size_t r0 = blk * kGemmChunkRows;
    std::size_t m = std::min(kGemmChunkRows, rows - r0);
    auto& acts = cache[cache_acts ? blk : 0];
    forward_block(arch, model.layers, xa + r0 * kBranchAInputs, xb + r0, m,
                  acts);
    std::copy_n(acts.h.back().data(), m, y.data() + r0);
  }

  double sum_w = 0.0, err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double d = y[i] - target[i];
    sum_w += omega[i];
    err += omega[i] * d * d;
    ref += omega[i] * target[i] * target[i];
  }
  LossBreakdown lb;
  lb.mse = err / sum_w;
  if (ref > 0.0)
    lb.rer = std::sqrt(err / ref);
  else
    lb.degenerate = true;
  lb.total = lb.mse + lambda * lb.rer;

  // d total / d y_i; the RER term shares the weighted error sum, so its
  // coefficient is global to the batch.
  const double mse_coeff = 2.0 / sum_w;
  const double rer_coeff =
      (lambda > 0.0 && err > 0.0 && ref > 0.0) ? lambda / std::sqrt(err * ref)
                                               : 0.0;

  const int wa = arch.branch_a_out();
  const int wb = arch.branch_b_out();
  std::vector<double> delta, scratch, delta_branch;
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    std::size_t r0 = blk * kGemmChunkRows;
    std::size_t m = std::min(kGemmChunkRows, rows - r0);
    auto& acts = cache[cache_acts ? blk : 0];
    if (!cache_acts && blocks > 1)
      forward_block(arch, model.layers, xa + r0 * kBranchAInputs, xb + r0, m,
                    acts);

    delta.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      double d = y[r0 + i] - target[r0 + i];
      delta[i] = omega[r0 + i] * d * (mse_coeff + rer_coeff);
    }

    // Output node and head, down to the concat layer.
    detail::backward_stack(model.layers, na + nb, nh + 1, acts.h, 0, m, delta,
                           grads, scratch, !arch.linear_output, true);

    // Split d(concat) into the two branch tails; the A part compacts in
    // place (memmove: source and destination rows can overlap).
    delta_branch.resize(m * wb);
    for (std::size_t r = 0; r < m; ++r)
      std::copy_n(&delta[r * (wa + wb) + wa], wb, &delta_branch[r * wb]);
    for (std::size_t r = 0; r < m; ++r)
      std::memmove(&delta[r * wa], &delta[r * (wa + wb)],
                   sizeof(double) * wa);
    delta.resize(m * wa);

    if (na > 0)
      detail::backward_stack(model.layers, 0, na, acts.a, 0, m, delta, grads,
                             scratch, true, false);
    if (nb > 0)
      detail::backward_stack(model.layers, na, nb, acts.b, 0, m, delta_branch,
                             grads, scratch, true, false);
  }
  return lb;
}

// Conveniences for tests and small callers.
inline LossBreakdown gradients(const Model& model, const FeatureBatch& batch,
                               double lambda, Grads& grads) {
  return gradients(model, batch.branch_a.data(), batch.branch_b.data(),
                   batch.target.data(), batch.omega.data(), batch.rows,
                   lambda, grads);
}

struct AdamState {
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
  long step = 0;

  static AdamState like(const Model& model) {
    AdamState s;
    for (const auto& layer : model.layers) {
      s.m_w.emplace_back(layer.w.size(), 0.0);
      s.v_w.emplace_back(layer.w.size(), 0.0);
      s.m_b.emplace_back(layer.b.size(), 0.0);
      s.v_b.emplace_back(layer.b.size(), 0.0);
    }
    return s;
  }
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

inline void adam_step(Model& model, const Grads& grads, AdamState& state,
                      double lr) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, state.step);
  const double bc2 = 1.0 - std::pow(kAdamBeta2, state.step);
  auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
      v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kAdamEpsilon);
    }
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    update(model.layers[l].w, grads.w[l], state.m_w[l], state.v_w[l]);
    update(model.layers[l].b, grads.b[l], state.m_b[l], state.v_b[l]);
  }
}

// Single-precision forward path for bulk prediction; weights are cast once.
class Predictor {
 public:
  explicit Predictor(const Model& model)
      : arch_(model.arch), enc_(model.enc), bounds_(model.bounds),
        avg_(model.avg) {
    for (const auto& layer : model.layers) {
      LayerT<float> f;
      f.in = layer.in;
      f.out = layer.out;
      f.w.assign(layer.w.begin(), layer.w.end());
      f.b.assign(layer.b.begin(), layer.b.end());
      layers_.push_back(std::move(f));
    }
  }

  const AvgMap& avg_map() const { return avg_; }
  const EncodingConstants& encoding() const { return enc_; }

  LuminanceMap predict(const SkyState& state, const LuminanceMap& sky,
                       const LuminanceMap& sun) const {
    FeatureBatch batch =
        assemble_features(state, nullptr, sky, sun, avg_, enc_, bounds_);
    LuminanceMap out = make_map(batch.width, batch.height);
    ActivationsT<float> acts;
    std::vector<float> xa(kGemmChunkRows * kBranchAInputs);
    std::vector<float> xb(kGemmChunkRows);
    for (std::size_t r0 = 0; r0 < batch.rows; r0 += kGemmChunkRows) {
      std::size_t m = std::min(kGemmChunkRows, batch.rows - r0);
      for (std::size_t i = 0; i < m * kBranchAInputs; ++i)
        xa[i] = static_cast<float>(batch.branch_a[r0 * kBranchAInputs + i]);
      for (std::size_t i = 0; i < m; ++i)
        xb[i] = static_cast<float>(batch.branch_b[r0 + i]);
      forward_block(arch_, layers_, xa.data(), xb.data(), m, acts);
      const auto& y = acts.h.back();
      for (std::size_t i = 0; i < m; ++i)
        out.values[r0 + i] =
            decode_luminance(std::clamp(static_cast<double>(y[i]), 0.0, 1.0),
                             enc_);
    }
    return out;
  }

 private:
  Architecture arch_;
  std::vector<LayerT<float>> layers_;
  EncodingConstants enc_;
  DomainBounds bounds_;
  AvgMap avg_;  // copied so the predictor owns everything it needs
};

// One-shot prediction; construct a Predictor directly when predicting many
// states from the same model.
inline LuminanceMap predict_panorama(const Model& model, const SkyState& state,
                                     const LuminanceMap& sky,
                                     const LuminanceMap& sun) {
  if (sky.width != model.avg.width || sky.height != model.avg.height ||
      sun.width != model.avg.width || sun.height != model.avg.height)
    throw DataError("predict_panorama: map dimensions mismatch model");
  return Predictor(model).predict(state, sky, sun);
}

}  // namespace panolum
