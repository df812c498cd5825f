#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "panolum/common.hpp"
#include "panolum/hdr.hpp"
#include "panolum/solar.hpp"
#include "panolum/spherical.hpp"

namespace panolum {

struct PixelErrors {
  double log10_mse = 0.0;
  double log10_rer = 0.0;
};

// Luminances are clamped to [1, 1.6e9] cd/m2 before the log10, so ground
// truth spans [0, 9.2] and the floor sits at 0. Both errors are solid-angle
// weighted and invariant under uniform rescaling of the weights.
inline PixelErrors pixel_errors(const LuminanceMap& pred,
                                const LuminanceMap& truth) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw DataError("pixel_errors: dimension mismatch");
  const SolidAngleMap sa = solid_angle_map(pred.width, pred.height);
  auto log_clamped = [](double lum) {
    return std::log10(std::clamp(lum, 1.0, kSunLuminance));
  };
  double sum_w = 0.0, err = 0.0, ref = 0.0;
  for (int py = 0; py < pred.height; ++py) {
    double w = sa.omega(py);
    for (int px = 0; px < pred.width; ++px) {
      double yp = log_clamped(pred.at(px, py));
      double yt = log_clamped(truth.at(px, py));
      double d = yp - yt;
      sum_w += w;
      err += w * d * d;
      ref += w * yt * yt;
    }
  }
  PixelErrors out;
  out.log10_mse = err / sum_w;
  out.log10_rer = ref > 0.0 ? std::sqrt(err / ref) : 0.0;
  return out;
}

namespace detail {

// Mean absolute difference against the existing 8-neighborhood, averaged
// over all pixels of one pyramid level.
inline double neighborhood_contrast(const std::vector<double>& v, int w,
                                    int h) {
  double level_sum = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double center = v[y * w + x];
      double acc = 0.0;
      int count = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        int ny = y + dy;
        if (ny < 0 || ny >= h) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          int nx = x + dx;
          if (nx < 0 || nx >= w) continue;
          acc += std::abs(center - v[ny * w + nx]);
          ++count;
        }
      }
      level_sum += acc / count;
    }
  }
  return level_sum / (static_cast<double>(w) * h);
}

inline std::vector<double> box_downsample(const std::vector<double>& v, int w,
                                          int h, int& ow, int& oh) {
  ow = w / 2;
  oh = h / 2;
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      out[y * ow + x] = 0.25 * (v[(2 * y) * w + 2 * x] +
                                v[(2 * y) * w + 2 * x + 1] +
                                v[(2 * y + 1) * w + 2 * x] +
                                v[(2 * y + 1) * w + 2 * x + 1]);
  return out;
}

}  // namespace detail

// Multiscale contrast of a value grid: mean 8-neighbor contrast per pyramid
// level (2x2 box downsampling, floored dims), averaged over the levels
// computed. Linear in the grid values.
inline double rammg_values(std::vector<double> v, int w, int h,
                           int levels = 5) {
  if (levels < 1) throw std::invalid_argument("rammg: levels must be >= 1");
  if (w < 2 || h < 2)
    throw std::invalid_argument("rammg: map must be at least 2x2");
  double sum = 0.0;
  int computed = 0;
  for (int level = 0; level < levels; ++level) {
    sum += detail::neighborhood_contrast(v, w, h);
    ++computed;
    if (level + 1 == levels) break;
    int ow, oh;
    v = detail::box_downsample(v, w, h, ow, oh);
    w = ow;
    h = oh;
    if (w < 2 || h < 2) break;
  }
  return sum / computed;
}

// RAMMG of a luminance map evaluated on log10 luminance, the same
// perceptual domain as the per-pixel errors.
inline double rammg(const LuminanceMap& map, int levels = 5) {
  if (map.width < 2 || map.height < 2)
    throw std::invalid_argument("rammg: map must be at least 2x2");
  std::vector<double> v(map.values.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = std::log10(std::clamp(map.values[i], 1.0, kSunLuminance));
  return rammg_values(std::move(v), map.width, map.height, levels);
}

// Joint (dir, dif) histogram over uniform bins spanning [0, 1400] and
// [0, 700] W/m2, normalized to fractions. Row-major with the direct axis
// outermost; the top edge is inclusive in the last bin.
inline std::vector<double> joint_distribution(
    const std::vector<SkyState>& states, int bins = 4) {
  if (states.empty())
    throw std::invalid_argument("joint_distribution: empty state list");
  if (bins < 1) throw std::invalid_argument("joint_distribution: bins >= 1");
  std::vector<double> fractions(static_cast<std::size_t>(bins) * bins, 0.0);
  auto bin_of = [bins](double v, double max) {
    int b = static_cast<int>(v / max * bins);
    return std::clamp(b, 0, bins - 1);
  };
  for (const auto& s : states)
    fractions[bin_of(s.dni, 1400.0) * bins + bin_of(s.dhi, 700.0)] += 1.0;
  for (double& f : fractions) f /= static_cast<double>(states.size());
  return fractions;
}

// Squared Pearson correlation of paired values; invariant under affine
// transforms applied to both members of each pair.
inline double pearson_r2(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("pearson_r2: need >= 2 pairs of equal size");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return saa == 0.0 && sbb == 0.0 ? 1.0 : 0.0;
  double r2 = (sab * sab) / (saa * sbb);
  return std::min(r2, 1.0);
}

}  // namespace panolum
