#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "panolum/common.hpp"
#include "panolum/hdr.hpp"

namespace panolum {

// Right-handed world frame shared by every module: +y is the panorama
// forward direction, +z is up, +x is right of forward.
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
          a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
  double n = norm(v);
  return n > 0.0 ? v * (1.0 / n) : Vec3{};
}

// Angle between unit vectors, degrees.
inline double angle_between_deg(const Vec3& a, const Vec3& b) {
  return rad2deg(std::acos(std::clamp(dot(a, b), -1.0, 1.0)));
}

// Direction on the unit sphere for continuous panorama coordinates.
// Longitude runs 2pi across the width (seam at +-180 deg), latitude pi down
// the height.
inline Vec3 pixel_direction(double px, double py, int width, int height) {
  if (!(px >= 0.0 && px < width) || !(py >= 0.0 && py < height))
    throw std::invalid_argument("pixel_direction: coordinate out of range");
  double lon = ((px + 0.5) / width) * 2.0 * kPi - kPi;
  double lat = kPi / 2.0 - ((py + 0.5) / height) * kPi;
  double cl = std::cos(lat);
  return {cl * std::sin(lon), cl * std::cos(lon), std::sin(lat)};
}

// Sun (or any sky) direction from altitude/azimuth, azimuth measured from
// south (forward), west positive.
inline Vec3 direction_from_angles(double altitude_deg, double azimuth_deg) {
  double al = deg2rad(altitude_deg);
  double az = deg2rad(azimuth_deg);
  double ca = std::cos(al);
  return {ca * std::sin(az), ca * std::cos(az), std::sin(al)};
}

// Per-row pixel solid angles from the exact sphere-band integral, so the
// full-sphere sum telescopes to 4*pi.
struct SolidAngleMap {
  int width = 0;
  int height = 0;
  std::vector<double> row_omega;  // one entry per row, steradians

  double omega(int py) const { return row_omega[py]; }
  double total() const {
    double sum = 0.0;
    for (double w : row_omega) sum += w * width;
    return sum;
  }
};

inline SolidAngleMap solid_angle_map(int width, int height) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("solid_angle_map: dimensions must be >= 1");
  SolidAngleMap map;
  map.width = width;
  map.height = height;
  map.row_omega.resize(height);
  for (int py = 0; py < height; ++py) {
    double lat_top = kPi / 2.0 - py * kPi / height;
    double lat_bottom = kPi / 2.0 - (py + 1) * kPi / height;
    map.row_omega[py] =
        (2.0 * kPi / width) * (std::sin(lat_top) - std::sin(lat_bottom));
  }
  return map;
}

// Horizontal view axis for a yaw in degrees, clockwise from forward when
// seen from above. Yaw is reduced modulo 360 first (fmod is exact) so
// extractions at y and y + 360 are bitwise identical.
inline Vec3 view_axis(double yaw_deg) {
  double yaw = std::fmod(yaw_deg, 360.0);
  double r = deg2rad(yaw);
  return {std::sin(r), std::cos(r), 0.0};
}

// Bilinear panorama sample with horizontal wraparound and vertical clamp.
inline double sample_panorama(const LuminanceMap& pan, double px, double py) {
  const int w = pan.width, h = pan.height;
  double x = px - 0.5;
  double y = std::clamp(py - 0.5, 0.0, static_cast<double>(h - 1));
  double xf = std::floor(x);
  int x0 = static_cast<int>(xf);
  int y0 = static_cast<int>(y);
  double tx = x - xf;
  double ty = y - y0;
  auto wrap = [w](int ix) { return ((ix % w) + w) % w; };
  int x0w = wrap(x0), x1w = wrap(x0 + 1);
  int y1 = std::min(y0 + 1, h - 1);
  double v00 = pan.at(x0w, y0), v10 = pan.at(x1w, y0);
  double v01 = pan.at(x0w, y1), v11 = pan.at(x1w, y1);
  return (1 - ty) * ((1 - tx) * v00 + tx * v10) +
         ty * ((1 - tx) * v01 + tx * v11);
}

// Continuous panorama coordinates of a world direction.
inline void direction_to_pixel(const Vec3& d, int width, int height,
                               double& px, double& py) {
  double lon = std::atan2(d.x, d.y);
  double lat = std::asin(std::clamp(d.z, -1.0, 1.0));
  px = (lon + kPi) / (2.0 * kPi) * width;
  py = (kPi / 2.0 - lat) / kPi * height;
}

// 180-degree equidistant (equi-angular) fisheye: the angle from the view
// axis grows linearly with image radius. World up is image up.
struct FisheyeImage {
  int size = 0;
  double yaw = 0.0;
  std::vector<double> values;        // luminance, 0 outside the circle
  std::vector<uint8_t> valid;        // inside-circle mask

  double at(int x, int y) const { return values[y * size + x]; }
};

inline FisheyeImage panorama_to_fisheye(const LuminanceMap& pan,
                                        double yaw_deg, int size) {
  if (size < 2)
    throw std::invalid_argument("panorama_to_fisheye: size must be >= 2");
  FisheyeImage fish;
  fish.size = size;
  fish.yaw = yaw_deg;
  fish.values.assign(static_cast<std::size_t>(size) * size, 0.0);
  fish.valid.assign(static_cast<std::size_t>(size) * size, 0);

  const Vec3 axis = view_axis(yaw_deg);
  const Vec3 up{0.0, 0.0, 1.0};
  const Vec3 right = cross(axis, up);
  const double half = size / 2.0;

  for (int j = 0; j < size; ++j) {
    for (int i = 0; i < size; ++i) {
      double dx = (i + 0.5 - half) / half;
      double dy = (half - (j + 0.5)) / half;  // +dy is image up
      double r = std::sqrt(dx * dx + dy * dy);
      if (r > 1.0) continue;
      double theta = r * kPi / 2.0;
      Vec3 lateral{0.0, 0.0, 0.0};
      if (r > 0.0) {
        double inv_r = 1.0 / r;
        lateral = right * (dx * inv_r) + up * (dy * inv_r);
      }
      Vec3 d = axis * std::cos(theta) + lateral * std::sin(theta);
      double px, py;
      direction_to_pixel(d, pan.width, pan.height, px, py);
      fish.values[j * size + i] = sample_panorama(pan, px, py);
      fish.valid[j * size + i] = 1;
    }
  }
  return fish;
}

// Illuminance on a vertical plane at the viewpoint facing the yaw axis:
// cosine-weighted sum of pixel luminances over the forward hemisphere.
inline double vertical_illuminance(const LuminanceMap& pan, double yaw_deg) {
  const Vec3 axis = view_axis(yaw_deg);
  const SolidAngleMap omega = solid_angle_map(pan.width, pan.height);
  double ev = 0.0;
  for (int py = 0; py < pan.height; ++py) {
    double row = 0.0;
    for (int px = 0; px < pan.width; ++px) {
      double c = dot(pixel_direction(px, py, pan.width, pan.height), axis);
      if (c > 0.0) row += pan.at(px, py) * c;
    }
    ev += row * omega.omega(py);
  }
  return ev;
}

}  // namespace panolum
