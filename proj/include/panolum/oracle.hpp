#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "panolum/common.hpp"
#include "panolum/hdr.hpp"
#include "panolum/solar.hpp"
#include "panolum/spherical.hpp"

namespace panolum {

// Box office with a window in the south wall, lit by an analytic gradated
// sky plus a solar disc. World frame: +y south (panorama forward), +z up;
// the room occupies x in [-w/2, w/2], y in [0, depth], z in [0, height]
// with the window wall at y = depth.
struct SceneSpec {
  double room_width = 6.0;    // m, x extent
  double room_depth = 14.0;   // m, y extent
  double room_height = 4.5;   // m, z extent

  double window_center_x = 0.0;
  double window_center_z = 1.7;
  double window_width = 5.0;
  double window_height = 2.5;

  double refl_wall = 0.5;
  double refl_ceiling = 0.8;
  double refl_floor = 0.2;
  double refl_ground = 0.2;

  // Standing viewpoint on the room centerline, 1 m from the window wall.
  Vec3 camera{0.0, 13.0, 1.6};
};

inline void validate_scene(const SceneSpec& s) {
  auto in_unit = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!(s.room_width > 0 && s.room_depth > 0 && s.room_height > 0))
    throw std::invalid_argument("scene: room dimensions must be positive");
  if (!in_unit(s.refl_wall) || !in_unit(s.refl_ceiling) ||
      !in_unit(s.refl_floor) || !in_unit(s.refl_ground))
    throw std::invalid_argument("scene: reflectances must be in [0, 1]");
  if (s.window_width <= 0 || s.window_height <= 0 ||
      s.window_center_x - s.window_width / 2 < -s.room_width / 2 ||
      s.window_center_x + s.window_width / 2 > s.room_width / 2 ||
      s.window_center_z - s.window_height / 2 < 0 ||
      s.window_center_z + s.window_height / 2 > s.room_height)
    throw std::invalid_argument("scene: window must lie inside the south wall");
  const Vec3& c = s.camera;
  if (std::abs(c.x) >= s.room_width / 2 || c.y <= 0 || c.y >= s.room_depth ||
      c.z <= 0 || c.z >= s.room_height)
    throw std::invalid_argument("scene: camera must be inside the room");
}

// Solar disc: 0.266 deg angular radius, 6.8e-5 sr.
inline constexpr double kSunSolidAngle = 6.8e-5;
inline constexpr double kSunDiscRadiusDeg = 0.266;

// Gradated sky normalized so its horizontal diffuse irradiance equals dif:
// integral of (1 + 2 cos z)/3 * cos z over the hemisphere is 7 pi / 9.
struct OracleSky {
  double dni = 0.0;
  double dhi = 0.0;
  double sun_altitude = 0.0;
  double sun_azimuth = 0.0;

  double zenith_radiance() const { return 9.0 * dhi / (7.0 * kPi); }
  double sun_radiance() const { return dni / kSunSolidAngle; }
  Vec3 sun_direction() const {
    return direction_from_angles(sun_altitude, sun_azimuth);
  }
};

inline OracleSky oracle_sky(const SkyState& state) {
  return {state.dni, state.dhi, state.altitude, state.azimuth};
}

// Radiance field of the bare sky (W.m-2.sr-1); luminance is 179x this.
// The solar disc is the literal 0.266-deg cap here; panorama rasterization
// deposits the disc energy into its containing pixel instead (see
// render_triple).
inline double sky_radiance(const OracleSky& sky, const Vec3& dir,
                           double refl_ground = 0.2) {
  if (dir.z > 0.0) {
    double r = sky.zenith_radiance() * (1.0 + 2.0 * dir.z) / 3.0;
    if (sky.dni > 0.0 && sky.sun_altitude > 0.0 &&
        angle_between_deg(dir, sky.sun_direction()) <= kSunDiscRadiusDeg)
      r += sky.sun_radiance();
    return r;
  }
  double sin_al = std::max(0.0, std::sin(deg2rad(sky.sun_altitude)));
  return refl_ground * (sky.dhi + sky.dni * sin_al) / kPi;
}

namespace detail {

enum class Face { kWest, kEast, kNorth, kSouth, kFloor, kCeiling };

struct SurfaceHit {
  Vec3 point{};
  Face face = Face::kSouth;
  Vec3 normal{};  // inward
  double reflectance = 0.0;
};

// Exit point of a ray starting inside the box.
inline SurfaceHit box_exit(const SceneSpec& s, const Vec3& origin,
                           const Vec3& dir) {
  double best_t = std::numeric_limits<double>::infinity();
  Face face = Face::kSouth;
  auto consider = [&](double t, Face f) {
    if (t > 1e-12 && t < best_t) {
      best_t = t;
      face = f;
    }
  };
  const double hw = s.room_width / 2;
  if (dir.x > 0) consider((hw - origin.x) / dir.x, Face::kEast);
  if (dir.x < 0) consider((-hw - origin.x) / dir.x, Face::kWest);
  if (dir.y > 0) consider((s.room_depth - origin.y) / dir.y, Face::kSouth);
  if (dir.y < 0) consider((0.0 - origin.y) / dir.y, Face::kNorth);
  if (dir.z > 0) consider((s.room_height - origin.z) / dir.z, Face::kCeiling);
  if (dir.z < 0) consider((0.0 - origin.z) / dir.z, Face::kFloor);

  SurfaceHit hit;
  hit.point = origin + dir * best_t;
  hit.face = face;
  switch (face) {
    case Face::kWest: hit.normal = {1, 0, 0}; hit.reflectance = s.refl_wall; break;
    case Face::kEast: hit.normal = {-1, 0, 0}; hit.reflectance = s.refl_wall; break;
    case Face::kNorth: hit.normal = {0, 1, 0}; hit.reflectance = s.refl_wall; break;
    case Face::kSouth: hit.normal = {0, -1, 0}; hit.reflectance = s.refl_wall; break;
    case Face::kFloor: hit.normal = {0, 0, 1}; hit.reflectance = s.refl_floor; break;
    case Face::kCeiling: hit.normal = {0, 0, -1}; hit.reflectance = s.refl_ceiling; break;
  }
  return hit;
}

inline bool inside_window(const SceneSpec& s, double x, double z) {
  return x >= s.window_center_x - s.window_width / 2 &&
         x <= s.window_center_x + s.window_width / 2 &&
         z >= s.window_center_z - s.window_height / 2 &&
         z <= s.window_center_z + s.window_height / 2;
}

// Whether a ray from `p` toward the sun leaves through the window aperture
// (the only opening; the box is convex so nothing else can block).
inline bool sun_visible(const SceneSpec& s, const Vec3& p,
                        const Vec3& sun_dir) {
  if (sun_dir.y <= 1e-12) return false;
  double t = (s.room_depth - p.y) / sun_dir.y;
  if (t <= 1e-12) return false;
  return inside_window(s, p.x + t * sun_dir.x, p.z + t * sun_dir.z);
}

// Exact form factor of the window rectangle seen from a differential
// surface at p with inward normal n (contour-integral formula).
inline double window_form_factor(const SceneSpec& s, const Vec3& p,
                                 const Vec3& n) {
  const double x0 = s.window_center_x - s.window_width / 2;
  const double x1 = s.window_center_x + s.window_width / 2;
  const double z0 = s.window_center_z - s.window_height / 2;
  const double z1 = s.window_center_z + s.window_height / 2;
  const double y = s.room_depth;
  // Counter-clockwise as seen from inside the room (looking along +y).
  const std::array<Vec3, 4> corners = {Vec3{x0, y, z0}, Vec3{x0, y, z1},
                                       Vec3{x1, y, z1}, Vec3{x1, y, z0}};
  std::array<Vec3, 4> u;
  for (int i = 0; i < 4; ++i) u[i] = normalized(corners[i] - p);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Vec3& a = u[i];
    const Vec3& b = u[(i + 1) % 4];
    double theta = std::acos(std::clamp(dot(a, b), -1.0, 1.0));
    Vec3 gamma = normalized(cross(a, b));
    sum += theta * dot(gamma, n);
  }
  return std::max(0.0, sum / (2.0 * kPi));
}

// Irradiance fraction of the gradated sky on a vertical plane:
// (6 / 7 pi) (pi / 4 + 2 / 3).
inline constexpr double kSkyVerticalFraction = 0.39617629514223239;

}  // namespace detail

struct SampleMaps {
  LuminanceMap interior;
  LuminanceMap sky;
  LuminanceMap sun;
};

// Renders the (interior, sky, sun-patch) triple for one sky state. The sun
// patch is the direct-only interior; the interior adds the window-seen sky
// plus analytic diffuse terms (window form factor and a single-constant
// ambient), so interior >= sun patch holds pixelwise. The solar disc is
// smaller than any practical pixel, so its energy is deposited into the
// pixel containing the sun center as dni / omega_pixel, which keeps vertical
// illuminance and map linearity in (dir, dif) physical.
inline SampleMaps render_triple(const SceneSpec& scene, const SkyState& state,
                                int width, int height) {
  validate_scene(scene);
  if (width < 2 || height < 2)
    throw std::invalid_argument("render_triple: dimensions must be >= 2");

  const OracleSky sky = oracle_sky(state);
  const SolidAngleMap sa = solid_angle_map(width, height);
  const Vec3 sun_dir = sky.sun_direction();
  const bool sun_up = state.altitude > 0.0 && sky.dni > 0.0;

  // Pixel containing the sun center, if its view ray leaves via the window.
  int sun_px = -1, sun_py = -1;
  bool sun_via_window = false;
  if (sun_up) {
    double px, py;
    direction_to_pixel(sun_dir, width, height, px, py);
    sun_px = std::clamp(static_cast<int>(px), 0, width - 1);
    sun_py = std::clamp(static_cast<int>(py), 0, height - 1);
    detail::SurfaceHit hit = detail::box_exit(scene, scene.camera, sun_dir);
    sun_via_window = hit.face == detail::Face::kSouth &&
                     detail::inside_window(scene, hit.point.x, hit.point.z);
  }

  // Single-constant ambient from the flux entering the window.
  const double sin_al = std::max(0.0, std::sin(deg2rad(state.altitude)));
  const double window_area = scene.window_width * scene.window_height;
  const double e_window =
      (sun_up ? sky.dni * std::max(0.0, sun_dir.y) : 0.0) +
      sky.dhi * detail::kSkyVerticalFraction +
      scene.refl_ground * (sky.dhi + sky.dni * sin_al) / 2.0;
  const double wall_area =
      2.0 * scene.room_height * (scene.room_width + scene.room_depth) -
      window_area;
  const double cap_area = scene.room_width * scene.room_depth;
  const double total_area = wall_area + 2.0 * cap_area;
  const double mean_refl =
      (wall_area * scene.refl_wall + cap_area * scene.refl_ceiling +
       cap_area * scene.refl_floor) /
      total_area;
  const double e_ambient = window_area * e_window * mean_refl /
                           (total_area * (1.0 - mean_refl));

  SampleMaps maps{make_map(width, height), make_map(width, height),
                  make_map(width, height)};
  auto to_lum = [](double radiance) {
    return std::min(179.0 * radiance, kSunLuminance);
  };

  for (int py = 0; py < height; ++py) {
    for (int px = 0; px < width; ++px) {
      const Vec3 d = pixel_direction(px, py, width, height);
      const bool is_sun_pixel = sun_up && px == sun_px && py == sun_py;
      const double sun_deposit =
          is_sun_pixel ? sky.dni / sa.omega(py) : 0.0;

      // Bare-sky panorama (no room).
      double sky_r;
      if (d.z > 0.0) {
        sky_r = sky.zenith_radiance() * (1.0 + 2.0 * d.z) / 3.0 + sun_deposit;
      } else {
        sky_r = scene.refl_ground * (sky.dhi + sky.dni * sin_al) / kPi;
      }
      maps.sky.at(px, py) = to_lum(sky_r);

      const detail::SurfaceHit hit =
          detail::box_exit(scene, scene.camera, d);
      const bool through_window =
          hit.face == detail::Face::kSouth &&
          detail::inside_window(scene, hit.point.x, hit.point.z);

      if (through_window) {
        // Sun patch shows only the solar disc through the window.
        maps.sun.at(px, py) =
            sun_via_window && is_sun_pixel ? to_lum(sun_deposit) : 0.0;
        double r = d.z > 0.0
                       ? sky.zenith_radiance() * (1.0 + 2.0 * d.z) / 3.0
                       : scene.refl_ground * (sky.dhi + sky.dni * sin_al) /
                             kPi;
        if (sun_via_window && is_sun_pixel) r += sun_deposit;
        maps.interior.at(px, py) = to_lum(r);
      } else {
        double direct = 0.0;
        if (sun_up && detail::sun_visible(scene, hit.point, sun_dir)) {
          double cos_incidence = std::max(0.0, dot(sun_dir, hit.normal));
          direct = hit.reflectance / kPi * sky.dni * cos_incidence;
        }
        maps.sun.at(px, py) = to_lum(direct);
        double e_sky = sky.dhi * detail::window_form_factor(scene, hit.point,
                                                            hit.normal);
        double diffuse = hit.reflectance / kPi * (e_sky + e_ambient);
        maps.interior.at(px, py) = to_lum(direct + diffuse);
      }
    }
  }
  return maps;
}

}  // namespace panolum
