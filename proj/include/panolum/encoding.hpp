#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "panolum/common.hpp"
#include "panolum/hdr.hpp"
#include "panolum/sampling.hpp"
#include "panolum/solar.hpp"
#include "panolum/spherical.hpp"

namespace panolum {

// log10 over [floor, ceiling], min-max normalized, then a brightening gamma
// that shifts the left-skewed luminance histogram toward 1/2.
struct EncodingConstants {
  double floor = 1e-2;          // cd/m2; stands in for log10(0)
  double ceiling = kSunLuminance;
  double gamma = 1.5;

  double log_floor() const { return std::log10(floor); }
  double log_span() const { return std::log10(ceiling) - std::log10(floor); }
};

inline double encode_luminance(double lum, const EncodingConstants& c = {}) {
  double clamped = std::clamp(lum, c.floor, c.ceiling);
  double e = (std::log10(clamped) - c.log_floor()) / c.log_span();
  return std::pow(e, 1.0 / c.gamma);
}

inline double decode_luminance(double p, const EncodingConstants& c = {}) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("decode_luminance: value outside [0, 1]");
  return std::pow(10.0, std::pow(p, c.gamma) * c.log_span() + c.log_floor());
}

// Per-pixel mean of the encoded interior luminance over the training set.
struct AvgMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[y * width + x]; }
};

// Streaming accumulator so a year of maps never has to sit in memory.
class AvgMapAccumulator {
 public:
  AvgMapAccumulator(int width, int height, EncodingConstants enc = {})
      : enc_(enc), width_(width), height_(height),
        sum_(static_cast<std::size_t>(width) * height, 0.0) {}

  void add(const LuminanceMap& interior) {
    if (interior.width != width_ || interior.height != height_)
      throw DataError("avg map: interior dimensions mismatch");
    for (std::size_t i = 0; i < sum_.size(); ++i)
      sum_[i] += encode_luminance(interior.values[i], enc_);
    ++count_;
  }

  AvgMap finish() const {
    if (count_ == 0)
      throw std::invalid_argument("avg map: no training samples");
    AvgMap avg;
    avg.width = width_;
    avg.height = height_;
    avg.values.resize(sum_.size());
    for (std::size_t i = 0; i < sum_.size(); ++i)
      avg.values[i] = sum_[i] / count_;
    return avg;
  }

 private:
  EncodingConstants enc_;
  int width_;
  int height_;
  std::vector<double> sum_;
  int count_ = 0;
};

inline AvgMap average_luminance_map(const std::vector<LuminanceMap>& interiors,
                                    EncodingConstants enc = {}) {
  if (interiors.empty())
    throw std::invalid_argument("average_luminance_map: no samples");
  AvgMapAccumulator acc(interiors[0].width, interiors[0].height, enc);
  for (const auto& m : interiors) acc.add(m);
  return acc.finish();
}

// Pixel rows for the network, already split into the two branch inputs:
// branch A gets (px, py, al, az, dir, dif, avg, skymap), branch B gets
// (sunpatch). Targets are encoded interior luminances; omega is the pixel
// solid angle used by the loss.
struct FeatureBatch {
  std::size_t rows = 0;
  int width = 0;
  int height = 0;
  std::vector<double> branch_a;  // rows x 8
  std::vector<double> branch_b;  // rows x 1
  std::vector<double> target;    // rows (empty at prediction time)
  std::vector<double> omega;     // rows

  // Row in the documented 9-feature order
  // (px, py, al, az, dir, dif, avg, sunpatch, skymap).
  std::array<double, 9> row(std::size_t i) const {
    const double* a = &branch_a[i * 8];
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], branch_b[i], a[7]};
  }
};

inline constexpr int kBranchAInputs = 8;
inline constexpr int kBranchBInputs = 1;

// Assembles one sample's pixel rows. Pass nullptr interior at prediction
// time. Output order is row-major regardless of how callers parallelize.
inline FeatureBatch assemble_features(const SkyState& state,
                                      const LuminanceMap* interior,
                                      const LuminanceMap& sky,
                                      const LuminanceMap& sun,
                                      const AvgMap& avg,
                                      const EncodingConstants& enc = {},
                                      const DomainBounds& bounds = {}) {
  const int w = avg.width, h = avg.height;
  auto check = [&](int mw, int mh, const char* what) {
    if (mw != w || mh != h)
      throw DataError(std::string("assemble_features: ") + what +
                      " dimensions mismatch");
  };
  check(sky.width, sky.height, "sky map");
  check(sun.width, sun.height, "sun patch");
  if (interior) check(interior->width, interior->height, "interior");

  const auto domain = normalize_light_coords(state, bounds);
  const SolidAngleMap sa = solid_angle_map(w, h);

  FeatureBatch batch;
  batch.rows = static_cast<std::size_t>(w) * h;
  batch.width = w;
  batch.height = h;
  batch.branch_a.resize(batch.rows * kBranchAInputs);
  batch.branch_b.resize(batch.rows);
  batch.omega.resize(batch.rows);
  if (interior) batch.target.resize(batch.rows);

  std::size_t r = 0;
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px, ++r) {
      double* a = &batch.branch_a[r * kBranchAInputs];
      a[0] = (px + 0.5) / w;
      a[1] = (py + 0.5) / h;
      a[2] = domain[0];
      a[3] = domain[1];
      a[4] = domain[2];
      a[5] = domain[3];
      a[6] = avg.at(px, py);
      a[7] = encode_luminance(sky.at(px, py), enc);
      batch.branch_b[r] = encode_luminance(sun.at(px, py), enc);
      batch.omega[r] = sa.omega(py);
      if (interior)
        batch.target[r] = encode_luminance(interior->at(px, py), enc);
    }
  }
  return batch;
}

}  // namespace panolum
