#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "panolum/network.hpp"

using namespace panolum;

namespace {

Architecture tiny_arch() {
  Architecture arch;
  arch.branch_a = {5};
  arch.branch_b = {3};
  arch.head = {4};
  return arch;
}

FeatureBatch random_batch(std::size_t rows, uint64_t seed,
                          bool dark = false) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FeatureBatch batch;
  batch.rows = rows;
  batch.branch_a.resize(rows * kBranchAInputs);
  batch.branch_b.resize(rows);
  batch.target.resize(rows);
  batch.omega.resize(rows);
  for (auto& v : batch.branch_a) v = u(gen);
  for (auto& v : batch.branch_b) v = u(gen);
  for (auto& v : batch.target) v = dark ? 0.0 : u(gen);
  for (auto& v : batch.omega) v = 0.5 + u(gen);
  return batch;
}

double loss_of(const Model& model, const FeatureBatch& batch, double lambda) {
  return loss(forward(model, batch), batch.target, batch.omega, lambda).total;
}

// Central finite differences over every parameter.
double max_grad_rel_error(Model model, const FeatureBatch& batch,
                          double lambda, double h = 1e-5) {
  Grads grads = zero_grads(model);
  gradients(model, batch, lambda, grads);
  double worst = 0.0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto probe = [&](std::vector<double>& params, std::size_t i,
                     double analytic) {
      double keep = params[i];
      params[i] = keep + h;
      double up = loss_of(model, batch, lambda);
      params[i] = keep - h;
      double down = loss_of(model, batch, lambda);
      params[i] = keep;
      double numeric = (up - down) / (2.0 * h);
      double rel = std::abs(analytic - numeric) /
                   std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
    };
    for (std::size_t i = 0; i < model.layers[l].w.size(); ++i)
      probe(model.layers[l].w, i, grads.w[l][i]);
    for (std::size_t i = 0; i < model.layers[l].b.size(); ++i)
      probe(model.layers[l].b, i, grads.b[l][i]);
  }
  return worst;
}

}  // namespace

TEST_CASE("init is deterministic with zero biases") {
  Model a = init_network(tiny_arch(), 42);
  Model b = init_network(tiny_arch(), 42);
  REQUIRE(a.layers.size() == b.layers.size());
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    CHECK(a.layers[l].w == b.layers[l].w);
    for (double bias : a.layers[l].b) CHECK(bias == 0.0);
  }
  Model c = init_network(tiny_arch(), 43);
  CHECK(c.layers[0].w != a.layers[0].w);
}

TEST_CASE("weight std of a 600x600 layer is He-scaled") {
  Architecture arch;
  arch.branch_a = {600, 600};
  arch.branch_b = {};
  arch.head = {};
  Model m = init_network(arch, 7);
  const auto& w = m.layers[1].w;  // 600 x 600
  REQUIRE(w.size() == 360000);
  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= w.size();
  double var = 0.0;
  for (double v : w) var += (v - mean) * (v - mean);
  double stddev = std::sqrt(var / w.size());
  double expect = std::sqrt(2.0 / 600.0);
  CHECK(std::abs(stddev - expect) / expect < 0.05);
}

TEST_CASE("default architecture parameter count is about 1.7M") {
  Model m = init_network(Architecture{}, 1);
  CHECK(count_parameters(m) == 1689201);
}

TEST_CASE("zero network outputs zero; output bias passes through ReLU") {
  Model m = init_network(tiny_arch(), 1);
  for (auto& layer : m.layers) {
    std::fill(layer.w.begin(), layer.w.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
  FeatureBatch batch = random_batch(7, 2);
  for (double y : forward(m, batch)) CHECK(y == 0.0);
  m.layers.back().b[0] = 0.3;
  for (double y : forward(m, batch)) CHECK(y == 0.3);
}

TEST_CASE("forward matches naive per-element arithmetic") {
  Architecture arch;
  arch.branch_a = {2};
  arch.branch_b = {1};
  arch.head = {};
  Model m = init_network(arch, 3);
  // fixture weights
  m.layers[0].w = {0.1, -0.2, 0.3, 0.05, -0.4, 0.25, 0.15, -0.1,
                   0.2, 0.1,  -0.3, 0.4, 0.1,  -0.05, 0.3, 0.2};
  m.layers[0].b = {0.05, -0.1};
  m.layers[1].w = {0.7};
  m.layers[1].b = {0.2};
  m.layers[2].w = {0.5, -0.6, 0.9};
  m.layers[2].b = {0.05};

  FeatureBatch batch = random_batch(5, 4);
  std::vector<double> got = forward(m, batch);
  for (std::size_t r = 0; r < batch.rows; ++r) {
    double a[2];
    for (int o = 0; o < 2; ++o) {
      double z = m.layers[0].b[o];
      for (int i = 0; i < 8; ++i)
        z += m.layers[0].w[o * 8 + i] * batch.branch_a[r * 8 + i];
      a[o] = std::max(0.0, z);
    }
    double b = std::max(0.0, 0.7 * batch.branch_b[r] + 0.2);
    double y = std::max(0.0, 0.5 * a[0] - 0.6 * a[1] + 0.9 * b + 0.05);
    CHECK(std::abs(got[r] - y) < 1e-12);
  }
}

TEST_CASE("loss hand example and invariances") {
  LossBreakdown lb = loss({0.6}, {0.5}, {1.0}, 10.0);
  CHECK(lb.mse == Catch::Approx(0.01).epsilon(1e-12));
  CHECK(lb.rer == Catch::Approx(0.2).epsilon(1e-12));
  CHECK(lb.total == Catch::Approx(2.01).epsilon(1e-12));
  CHECK_FALSE(lb.degenerate);

  FeatureBatch batch = random_batch(64, 5);
  std::vector<double> pred(batch.rows, 0.4);
  LossBreakdown base = loss(pred, batch.target, batch.omega, 10.0);
  std::vector<double> omega2 = batch.omega;
  for (auto& w : omega2) w *= 2.0;  // exact scaling
  LossBreakdown scaled = loss(pred, batch.target, omega2, 10.0);
  CHECK(scaled.mse == base.mse);
  CHECK(scaled.rer == base.rer);
  CHECK(scaled.total == base.total);

  LossBreakdown zero = loss(batch.target, batch.target, batch.omega, 10.0);
  CHECK(zero.total == 0.0);

  LossBreakdown dark = loss({0.1, 0.2}, {0.0, 0.0}, {1.0, 1.0}, 10.0);
  CHECK(dark.degenerate);
  CHECK(dark.rer == 0.0);
  CHECK(dark.total == dark.mse);
}

// Gradient checks need a differentiable point: zero biases leave rows with
// an all-dead head sitting exactly on the output ReLU kink, where central
// differences are invalid. Small positive biases move every pre-activation
// off the kink without touching the gradient math under test.
static void nudge_biases(Model& m) {
  for (std::size_t l = 0; l < m.layers.size(); ++l)
    for (std::size_t j = 0; j < m.layers[l].b.size(); ++j)
      m.layers[l].b[j] = 0.02 + 0.01 * ((l + j) % 3);
}

TEST_CASE("analytic gradients match central finite differences") {
  Architecture arch;
  arch.branch_a = {5};
  arch.branch_b = {3};
  arch.head = {4};
  FeatureBatch batch = random_batch(20, 6);
  for (double lambda : {0.0, 10.0}) {
    Model m = init_network(arch, 11);
    nudge_biases(m);
    CHECK(max_grad_rel_error(m, batch, lambda) < 1e-4);
  }
}

TEST_CASE("gradient is zero at zero error and for dead units") {
  Model m = init_network(tiny_arch(), 9);
  FeatureBatch batch = random_batch(16, 10);
  batch.target = forward(m, batch);
  Grads grads = zero_grads(m);
  gradients(m, batch, 10.0, grads);
  for (const auto& g : grads.w)
    for (double v : g) CHECK(v == 0.0);
  for (const auto& g : grads.b)
    for (double v : g) CHECK(v == 0.0);

  // unit 0 of the first branch-A layer held dead by a large negative bias
  Model dead = init_network(tiny_arch(), 12);
  dead.layers[0].b[0] = -100.0;
  Grads g2 = zero_grads(dead);
  gradients(dead, batch, 10.0, g2);
  for (int i = 0; i < dead.layers[0].in; ++i) CHECK(g2.w[0][i] == 0.0);
  CHECK(g2.b[0][0] == 0.0);
}

TEST_CASE("gradients accumulate identically across block boundaries") {
  // Two batches around the GEMM chunk size must agree with a direct sum.
  Architecture arch;
  arch.branch_a = {4};
  arch.branch_b = {2};
  arch.head = {};
  Model m = init_network(arch, 21);
  FeatureBatch big = random_batch(kGemmChunkRows + 37, 22);
  Grads grads = zero_grads(m);
  LossBreakdown lb = gradients(m, big, 10.0, grads);
  CHECK(std::isfinite(lb.total));
  // spot-check against finite differences on a few parameters
  double h = 1e-6;
  auto probe = [&](std::vector<double>& params, double analytic) {
    double keep = params[0];
    params[0] = keep + h;
    double up = loss_of(m, big, 10.0);
    params[0] = keep - h;
    double down = loss_of(m, big, 10.0);
    params[0] = keep;
    double numeric = (up - down) / (2 * h);
    CHECK(std::abs(analytic - numeric) /
              std::max({std::abs(analytic), std::abs(numeric), 1e-8}) <
          1e-3);
  };
  probe(m.layers[0].w, grads.w[0][0]);
  probe(m.layers.back().w, grads.w.back()[0]);
}

TEST_CASE("adam stationary at zero gradient and scale-invariant per step") {
  Model m = init_network(tiny_arch(), 30);
  Model before = m;
  Grads zero = zero_grads(m);
  AdamState state = AdamState::like(m);
  adam_step(m, zero, state, 1e-3);
  for (std::size_t l = 0; l < m.layers.size(); ++l)
    CHECK(m.layers[l].w == before.layers[l].w);

  // first-step magnitude ~ lr regardless of gradient scale
  for (double g : {0.5, 1.0}) {
    Model single = init_network(tiny_arch(), 31);
    double w0 = single.layers[0].w[0];
    Grads grads = zero_grads(single);
    grads.w[0][0] = g;
    AdamState st = AdamState::like(single);
    adam_step(single, grads, st, 1e-3);
    double step = w0 - single.layers[0].w[0];
    CHECK(step == Catch::Approx(1e-3).epsilon(1e-4));
  }
}

TEST_CASE("predict_panorama bounds and zero-model output") {
  Architecture arch = tiny_arch();
  Model m = init_network(arch, 40);
  for (auto& layer : m.layers) {
    std::fill(layer.w.begin(), layer.w.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
  m.avg.width = 8;
  m.avg.height = 4;
  m.avg.values.assign(32, 0.5);
  LuminanceMap sky = make_map(8, 4, 500.0), sun = make_map(8, 4, 0.0);
  SkyState st{{2017, 6, 1, 12, 30}, 50.0, 0.0, 500.0, 200.0};
  LuminanceMap out = predict_panorama(m, st, sky, sun);
  for (double v : out.values) CHECK(v == Catch::Approx(1e-2).epsilon(1e-6));

  Model rand_model = init_network(arch, 41);
  rand_model.avg = m.avg;
  LuminanceMap out2 = predict_panorama(rand_model, st, sky, sun);
  for (double v : out2.values) {
    CHECK(v >= 1e-2);
    CHECK(v <= 1.6e9);
  }
  LuminanceMap wrong = make_map(4, 4, 1.0);
  CHECK_THROWS_AS(predict_panorama(rand_model, st, wrong, sun), DataError);
}
