#pragma once

#include <ostream>
#include <vector>

#include <json.hpp>

#include "panolum/dataset.hpp"
#include "panolum/glare.hpp"
#include "panolum/metrics.hpp"
#include "panolum/network.hpp"
#include "panolum/parallel.hpp"

namespace panolum {

inline std::vector<double> default_dgp_yaws() {
  std::vector<double> yaws;
  for (int y = 0; y < 360; y += 36) yaws.push_back(y);
  return yaws;
}

struct DgpPair {
  int sample = 0;  // dataset index
  double yaw = 0.0;
  double truth = 0.0;
  double predicted = 0.0;
};

struct SampleErrors {
  int sample = 0;
  double log10_mse = 0.0;
  double log10_rer = 0.0;
  double rammg_truth = 0.0;
  double rammg_predicted = 0.0;
};

struct EvalReport {
  std::vector<SampleErrors> samples;
  std::vector<DgpPair> dgp_pairs;
  double mean_log10_mse = 0.0;
  double mean_log10_rer = 0.0;
  double dgp_mse = 0.0;
  double dgp_r2 = 0.0;
  double rammg_mse = 0.0;
  double rammg_r2 = 0.0;
};

// Predicts every test sample and compares against ground truth with the
// per-pixel log errors, DGP per view yaw, and RAMMG. Samples evaluate in
// parallel into fixed slots; aggregation order is the index order.
inline EvalReport evaluation_report(
    const Model& model, const Dataset& ds, const std::vector<int>& test,
    const std::vector<double>& yaws = default_dgp_yaws(), int rammg_levels = 5) {
  if (test.empty())
    throw std::invalid_argument("evaluation_report: empty test set");
  for (int idx : test)
    if (idx < 0 || idx >= static_cast<int>(ds.size()))
      throw std::invalid_argument("evaluation_report: test index out of range");

  const Predictor predictor(model);
  EvalReport report;
  report.samples.resize(test.size());
  report.dgp_pairs.resize(test.size() * yaws.size());

  parallel_for(test.size(), 1, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const int idx = test[i];
      SampleTriple sample = load_sample(ds, idx);
      LuminanceMap pred =
          predictor.predict(sample.state, sample.sky, sample.sun);

      SampleErrors& se = report.samples[i];
      se.sample = idx;
      PixelErrors pe = pixel_errors(pred, sample.interior);
      se.log10_mse = pe.log10_mse;
      se.log10_rer = pe.log10_rer;
      se.rammg_truth = rammg(sample.interior, rammg_levels);
      se.rammg_predicted = rammg(pred, rammg_levels);

      for (std::size_t y = 0; y < yaws.size(); ++y) {
        DgpPair& pair = report.dgp_pairs[i * yaws.size() + y];
        pair.sample = idx;
        pair.yaw = yaws[y];
        pair.truth = dgp(sample.interior, yaws[y]);
        pair.predicted = dgp(pred, yaws[y]);
      }
    }
  });

  std::vector<double> dgp_t, dgp_p, rammg_t, rammg_p;
  for (const auto& se : report.samples) {
    report.mean_log10_mse += se.log10_mse;
    report.mean_log10_rer += se.log10_rer;
    rammg_t.push_back(se.rammg_truth);
    rammg_p.push_back(se.rammg_predicted);
    double dr = se.rammg_predicted - se.rammg_truth;
    report.rammg_mse += dr * dr;
  }
  report.mean_log10_mse /= static_cast<double>(report.samples.size());
  report.mean_log10_rer /= static_cast<double>(report.samples.size());
  report.rammg_mse /= static_cast<double>(report.samples.size());

  for (const auto& pair : report.dgp_pairs) {
    double d = pair.predicted - pair.truth;
    report.dgp_mse += d * d;
    dgp_t.push_back(pair.truth);
    dgp_p.push_back(pair.predicted);
  }
  report.dgp_mse /= static_cast<double>(report.dgp_pairs.size());
  report.dgp_r2 = pearson_r2(dgp_t, dgp_p);
  report.rammg_r2 = pearson_r2(rammg_t, rammg_p);
  return report;
}

inline nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["n_samples"] = report.samples.size();
  j["n_dgp_pairs"] = report.dgp_pairs.size();
  j["mean_log10_mse"] = report.mean_log10_mse;
  j["mean_log10_rer"] = report.mean_log10_rer;
  j["dgp_mse"] = report.dgp_mse;
  j["dgp_r2"] = report.dgp_r2;
  j["rammg_mse"] = report.rammg_mse;
  j["rammg_r2"] = report.rammg_r2;
  nlohmann::json per = nlohmann::json::array();
  for (const auto& se : report.samples)
    per.push_back({{"sample", se.sample},
                   {"log10_mse", se.log10_mse},
                   {"log10_rer", se.log10_rer},
                   {"rammg_truth", se.rammg_truth},
                   {"rammg_predicted", se.rammg_predicted}});
  j["samples"] = per;
  return j;
}

inline void write_dgp_scatter_csv(const EvalReport& report,
                                  std::ostream& out) {
  out << "sample,yaw,dgp_truth,dgp_pred\n";
  for (const auto& p : report.dgp_pairs)
    out << p.sample << ',' << detail::format_double(p.yaw) << ','
        << detail::format_double(p.truth) << ','
        << detail::format_double(p.predicted) << '\n';
}

inline void write_rammg_scatter_csv(const EvalReport& report,
                                    std::ostream& out) {
  out << "sample,rammg_truth,rammg_pred\n";
  for (const auto& se : report.samples)
    out << se.sample << ',' << detail::format_double(se.rammg_truth) << ','
        << detail::format_double(se.rammg_predicted) << '\n';
}

}  // namespace panolum
