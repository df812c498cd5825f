#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "panolum/dataset.hpp"
#include "panolum/encoding.hpp"
#include "panolum/network.hpp"
#include "panolum/random.hpp"

namespace panolum {

// Training schedule: ADAM with plateau-driven learning-rate halving and
// batch-size halving every 30 epochs (or when the learning rate bottoms
// out). Batch sizes are counted in panorama rows: the initial minibatch is
// six images' worth of pixels, the floor one image's worth.
struct TrainConfig {
  double lambda = 10.0;
  double lr0 = 1e-3;
  double lr_factor = 2.0;
  int plateau_patience = 3;
  double plateau_min_improvement = 1e-6;  // relative
  int batch0_images = 6;
  int batch_min_images = 1;
  int batch_halve_after = 30;  // epochs since the last halving
  double lr_threshold = 1e-10;
  double val_loss_stop = 1e-10;
  int max_epochs = 500;
  uint64_t seed = 0;
  bool deterministic = false;  // accepted for the CLI contract; runs are
                               // bitwise reproducible either way
  Architecture arch;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  std::size_t batch_rows = 0;
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> history;
};

// Concatenated pixel rows of the listed samples.
inline FeatureBatch pool_rows(const Dataset& ds, const std::vector<int>& indices,
                              const AvgMap& avg,
                              const EncodingConstants& enc = {}) {
  FeatureBatch pool;
  pool.width = ds.width;
  pool.height = ds.height;
  const std::size_t per = static_cast<std::size_t>(ds.width) * ds.height;
  pool.rows = per * indices.size();
  pool.branch_a.reserve(pool.rows * kBranchAInputs);
  pool.branch_b.reserve(pool.rows);
  pool.target.reserve(pool.rows);
  pool.omega.reserve(pool.rows);
  for (int idx : indices) {
    SampleTriple sample = load_sample(ds, idx);
    FeatureBatch rows = assemble_features(sample.state, &sample.interior,
                                          sample.sky, sample.sun, avg, enc);
    pool.branch_a.insert(pool.branch_a.end(), rows.branch_a.begin(),
                         rows.branch_a.end());
    pool.branch_b.insert(pool.branch_b.end(), rows.branch_b.begin(),
                         rows.branch_b.end());
    pool.target.insert(pool.target.end(), rows.target.begin(),
                       rows.target.end());
    pool.omega.insert(pool.omega.end(), rows.omega.begin(), rows.omega.end());
  }
  return pool;
}

// Core loop over pre-assembled row pools. `rows_per_image` sets the batch
// size unit.
inline TrainResult train_rows(const FeatureBatch& train_pool,
                              const FeatureBatch& val_pool,
                              std::size_t rows_per_image,
                              const TrainConfig& config) {
  if (train_pool.rows == 0 || val_pool.rows == 0)
    throw std::invalid_argument("train: empty train or validation pool");

  Model model = init_network(config.arch, config.seed);
  AdamState adam = AdamState::like(model);
  Grads grads = zero_grads(model);

  std::mt19937_64 shuffle_gen(config.seed ^ 0x5851f42d4c957f2dull);
  std::vector<std::size_t> order(train_pool.rows);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t batch_min_rows = config.batch_min_images * rows_per_image;
  std::size_t batch_rows = config.batch0_images * rows_per_image;
  double lr = config.lr0;

  std::vector<Layer> best_layers = model.layers;
  double best_val = std::numeric_limits<double>::infinity();
  double plateau_ref = std::numeric_limits<double>::infinity();
  int plateau_count = 0;
  int epochs_since_halving = 0;

  TrainResult result;

  FeatureBatch batch;
  batch.width = train_pool.width;
  batch.height = train_pool.height;

  auto validation_loss = [&](const Model& m) {
    std::vector<double> pred = forward(m, val_pool);
    return loss(pred, val_pool.target, val_pool.omega, config.lambda).total;
  };

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng::shuffle(order, shuffle_gen);

    double epoch_loss = 0.0;
    std::size_t epoch_rows = 0;
    for (std::size_t pos = 0; pos < train_pool.rows; pos += batch_rows) {
      const std::size_t m = std::min(batch_rows, train_pool.rows - pos);
      batch.rows = m;
      batch.branch_a.resize(m * kBranchAInputs);
      batch.branch_b.resize(m);
      batch.target.resize(m);
      batch.omega.resize(m);
      for (std::size_t i = 0; i < m; ++i) {
        std::size_t src = order[pos + i];
        std::copy_n(&train_pool.branch_a[src * kBranchAInputs],
                    kBranchAInputs, &batch.branch_a[i * kBranchAInputs]);
        batch.branch_b[i] = train_pool.branch_b[src];
        batch.target[i] = train_pool.target[src];
        batch.omega[i] = train_pool.omega[src];
      }
      for (auto& g : grads.w) std::fill(g.begin(), g.end(), 0.0);
      for (auto& g : grads.b) std::fill(g.begin(), g.end(), 0.0);
      LossBreakdown lb = gradients(model, batch, config.lambda, grads);
      if (!std::isfinite(lb.total))
        throw NumericError("train: non-finite loss at epoch " +
                           std::to_string(epoch));
      adam_step(model, grads, adam, lr);
      epoch_loss += lb.total * static_cast<double>(m);
      epoch_rows += m;
    }

    const double train_loss = epoch_loss / static_cast<double>(epoch_rows);
    const double val_loss = validation_loss(model);
    if (!std::isfinite(val_loss))
      throw NumericError("train: non-finite validation loss at epoch " +
                         std::to_string(epoch));
    result.history.push_back(
        {epoch, train_loss, val_loss, lr, batch_rows});

    if (val_loss < best_val) {
      best_val = val_loss;
      best_layers = model.layers;
    }

    // Plateau detection for the learning rate.
    if (!std::isfinite(plateau_ref) ||
        plateau_ref - val_loss >
            config.plateau_min_improvement * std::abs(plateau_ref)) {
      plateau_ref = val_loss;
      plateau_count = 0;
    } else if (++plateau_count >= config.plateau_patience) {
      lr /= config.lr_factor;
      plateau_count = 0;
    }

    // Batch halving runs on its own clock, independent of the lr schedule.
    ++epochs_since_halving;
    if (epochs_since_halving >= config.batch_halve_after ||
        lr < config.lr_threshold) {
      batch_rows /= 2;
      epochs_since_halving = 0;
    }

    if (batch_rows < batch_min_rows) break;
    if (val_loss <= config.val_loss_stop) break;
  }

  model.layers = std::move(best_layers);
  model.meta.seed = config.seed;
  model.meta.epochs_run = static_cast<int>(result.history.size());
  model.meta.best_val_loss = best_val;
  result.model = std::move(model);
  return result;
}

// End-to-end training for a dataset schedule: builds the average-luminance
// map from the train split, pools pixel rows, and runs the schedule above.
inline TrainResult train(const Dataset& ds, const Schedule& sched,
                         const TrainConfig& config) {
  if (sched.train.empty() || sched.validation.empty())
    throw std::invalid_argument(
        "train: schedule needs nonempty train and validation sets");
  const EncodingConstants enc;
  AvgMap avg = avg_map_for_schedule(ds, sched, enc);
  FeatureBatch train_pool = pool_rows(ds, sched.train, avg, enc);
  FeatureBatch val_pool = pool_rows(ds, sched.validation, avg, enc);
  TrainResult result = train_rows(
      train_pool, val_pool, static_cast<std::size_t>(ds.width) * ds.height,
      config);
  result.model.enc = enc;
  result.model.avg = std::move(avg);
  result.model.meta.train_indices = sched.train;
  result.model.meta.validation_indices = sched.validation;
  return result;
}

inline void write_history_csv(const std::vector<EpochStats>& history,
                              std::ostream& out) {
  out << "epoch,train_loss,val_loss,lr,batch_rows\n";
  for (const auto& e : history)
    out << e.epoch << ',' << detail::format_double(e.train_loss) << ','
        << detail::format_double(e.val_loss) << ','
        << detail::format_double(e.lr) << ',' << e.batch_rows << '\n';
}

// Strict parser for the CLI's train-config JSON; unknown keys are rejected.
inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "lambda") cfg.lambda = value.get<double>();
    else if (key == "lr0") cfg.lr0 = value.get<double>();
    else if (key == "lr_factor") cfg.lr_factor = value.get<double>();
    else if (key == "plateau_patience") cfg.plateau_patience = value.get<int>();
    else if (key == "plateau_min_improvement")
      cfg.plateau_min_improvement = value.get<double>();
    else if (key == "batch0_images") cfg.batch0_images = value.get<int>();
    else if (key == "batch_min_images") cfg.batch_min_images = value.get<int>();
    else if (key == "batch_halve_after") cfg.batch_halve_after = value.get<int>();
    else if (key == "lr_threshold") cfg.lr_threshold = value.get<double>();
    else if (key == "val_loss_stop") cfg.val_loss_stop = value.get<double>();
    else if (key == "max_epochs") cfg.max_epochs = value.get<int>();
    else if (key == "seed") cfg.seed = value.get<uint64_t>();
    else if (key == "arch") {
      for (const auto& [akey, avalue] : value.items()) {
        if (akey == "branch_a") cfg.arch.branch_a = avalue.get<std::vector<int>>();
        else if (akey == "branch_b") cfg.arch.branch_b = avalue.get<std::vector<int>>();
        else if (akey == "head") cfg.arch.head = avalue.get<std::vector<int>>();
        else if (akey == "linear_output") cfg.arch.linear_output = avalue.get<bool>();
        else throw FormatError("train config: unknown arch key '" + akey + "'");
      }
    } else {
      throw FormatError("train config: unknown key '" + key + "'");
    }
  }
  if (cfg.lambda < 0 || cfg.lr0 <= 0 || cfg.lr_factor <= 1 ||
      cfg.plateau_patience < 1 || cfg.batch0_images < 1 ||
      cfg.batch_min_images < 1 || cfg.batch_min_images > cfg.batch0_images ||
      cfg.batch_halve_after < 1 || cfg.max_epochs < 1)
    throw std::invalid_argument("train config: values out of range");
  validate_architecture(cfg.arch);
  return cfg;
}

}  // namespace panolum
