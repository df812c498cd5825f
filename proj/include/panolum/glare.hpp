#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "panolum/common.hpp"
#include "panolum/hdr.hpp"
#include "panolum/spherical.hpp"

namespace panolum {

// One detected glare source: a connected set of bright pixels with its
// aggregate luminance L_s, solid angle w_s, mean direction, and Guth
// position index P.
struct GlareSource {
  std::vector<int> pixels;          // row-major indices into the panorama
  double mean_luminance = 0.0;      // cd/m2, omega-weighted
  double omega = 0.0;               // sr
  Vec3 direction{};                 // unit, omega-weighted mean
  double position_index = 1.0;      // >= 1
};

// Guth position-index fit. sigma is the angle from the view axis, tau the
// angle between the vertical plane of the axis and the plane holding the
// axis and the source (degrees). Sources below the line of sight reuse the
// fit with mirrored tau.
inline double guth_position_index(double sigma_deg, double tau_deg) {
  double t = tau_deg;
  double s = sigma_deg;
  double p = std::exp((35.2 - 0.31889 * t - 1.22 * std::exp(-2.0 * t / 9.0)) *
                          1e-3 * s +
                      (21.0 + 0.26667 * t - 0.002963 * t * t) * 1e-5 * s * s);
  return std::max(p, 1.0);
}

inline constexpr double kGlareThresholdRatio = 5.0;  // vs adaptation L_a

// Finds glare sources in the forward hemisphere of the view at `yaw`:
// pixels brighter than ratio * (E_v / pi), grouped into 8-connected
// components with horizontal wraparound.
inline std::vector<GlareSource> detect_glare_sources(
    const LuminanceMap& pan, double yaw_deg,
    double threshold_ratio = kGlareThresholdRatio) {
  const int w = pan.width, h = pan.height;
  const Vec3 axis = view_axis(yaw_deg);
  const double ev = vertical_illuminance(pan, yaw_deg);
  if (!(ev > 0.0)) return {};
  const double threshold = threshold_ratio * ev / kPi;

  const SolidAngleMap sa = solid_angle_map(w, h);
  std::vector<uint8_t> bright(static_cast<std::size_t>(w) * h, 0);
  for (int py = 0; py < h; ++py)
    for (int px = 0; px < w; ++px)
      if (pan.at(px, py) > threshold &&
          dot(pixel_direction(px, py, w, h), axis) > 0.0)
        bright[py * w + px] = 1;

  std::vector<GlareSource> sources;
  std::vector<int> stack;
  std::vector<uint8_t> seen(bright.size(), 0);
  const Vec3 up{0.0, 0.0, 1.0};
  const Vec3 right = cross(axis, up);

  for (int start = 0; start < w * h; ++start) {
    if (!bright[start] || seen[start]) continue;
    GlareSource src;
    double lum_omega = 0.0;
    Vec3 dir_sum{};
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      int idx = stack.back();
      stack.pop_back();
      src.pixels.push_back(idx);
      int px = idx % w, py = idx / w;
      double omega = sa.omega(py);
      double lum = pan.at(px, py);
      src.omega += omega;
      lum_omega += omega * lum;
      Vec3 d = pixel_direction(px, py, w, h);
      dir_sum = dir_sum + d * omega;
      for (int dy = -1; dy <= 1; ++dy) {
        int ny = py + dy;
        if (ny < 0 || ny >= h) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          int nx = (px + dx + w) % w;  // horizontal wrap
          int nidx = ny * w + nx;
          if (bright[nidx] && !seen[nidx]) {
            seen[nidx] = 1;
            stack.push_back(nidx);
          }
        }
      }
    }
    src.mean_luminance = lum_omega / src.omega;
    src.direction = normalized(dir_sum);
    double sigma = angle_between_deg(src.direction, axis);
    double lateral = std::abs(dot(src.direction, right));
    double vertical = std::abs(dot(src.direction, up));
    double tau = rad2deg(std::atan2(lateral, vertical));
    src.position_index = guth_position_index(sigma, tau);
    std::sort(src.pixels.begin(), src.pixels.end());
    sources.push_back(std::move(src));
  }
  return sources;
}

// Daylight glare probability (Wienold & Christoffersen):
// 5.87e-5 Ev + 9.18e-2 log10(1 + sum_i Ls_i^2 w_i / (Ev^1.87 P_i^2)) + 0.16,
// clamped to [0, 1]. Computed directly on the panorama hemisphere.
inline double dgp(const LuminanceMap& pan, double yaw_deg,
                  double threshold_ratio = kGlareThresholdRatio) {
  const double ev = vertical_illuminance(pan, yaw_deg);
  if (!(ev > 0.0)) return 0.16;  // no light, no sources
  double source_term = 0.0;
  for (const auto& src : detect_glare_sources(pan, yaw_deg, threshold_ratio))
    source_term += src.mean_luminance * src.mean_luminance * src.omega /
                   (std::pow(ev, 1.87) * src.position_index *
                    src.position_index);
  double value =
      5.87e-5 * ev + 9.18e-2 * std::log10(1.0 + source_term) + 0.16;
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace panolum
