#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "panolum/spherical.hpp"

using namespace panolum;

TEST_CASE("pixel_direction axes") {
  Vec3 fwd = pixel_direction(179.5, 89.5, 360, 180);
  CHECK(fwd.x == Catch::Approx(0.0).margin(1e-12));
  CHECK(fwd.y == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(fwd.z == Catch::Approx(0.0).margin(1e-12));

  Vec3 right = pixel_direction(269.5, 89.5, 360, 180);
  CHECK(right.x == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(right.y == Catch::Approx(0.0).margin(1e-12));

  Vec3 top = pixel_direction(179.5, 0.0, 360, 180);
  CHECK(top.z == Catch::Approx(std::sin(deg2rad(89.5))).epsilon(1e-12));
}

TEST_CASE("pixel_direction returns unit vectors") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> ux(0.0, 460.0), uy(0.0, 230.0);
  for (int i = 0; i < 200; ++i) {
    Vec3 d = pixel_direction(std::min(ux(gen), 459.999),
                             std::min(uy(gen), 229.999), 460, 230);
    CHECK(std::abs(norm(d) - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(pixel_direction(-0.1, 0, 460, 230), std::invalid_argument);
  CHECK_THROWS_AS(pixel_direction(0, 230, 460, 230), std::invalid_argument);
}

TEST_CASE("solid angles sum to the full sphere") {
  for (auto [w, h] : {std::pair{4, 2}, {92, 46}, {460, 230}, {1840, 920}}) {
    SolidAngleMap sa = solid_angle_map(w, h);
    CHECK(std::abs(sa.total() - 4.0 * kPi) / (4.0 * kPi) < 1e-12);
  }
  CHECK_THROWS_AS(solid_angle_map(0, 10), std::invalid_argument);
}

TEST_CASE("4x2 grid has uniform band solid angles") {
  SolidAngleMap sa = solid_angle_map(4, 2);
  CHECK(sa.omega(0) == Catch::Approx(kPi / 2).epsilon(1e-12));
  CHECK(sa.omega(1) == Catch::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("equator rows carry more solid angle than pole rows") {
  SolidAngleMap sa = solid_angle_map(8, 4);
  CHECK(sa.omega(1) > sa.omega(0));
  CHECK(sa.omega(2) > sa.omega(3));
}

TEST_CASE("fisheye of a uniform panorama is uniform") {
  LuminanceMap pan = make_map(92, 46, 123.0);
  FisheyeImage fish = panorama_to_fisheye(pan, 72.0, 64);
  for (int j = 0; j < fish.size; ++j)
    for (int i = 0; i < fish.size; ++i) {
      if (fish.valid[j * fish.size + i])
        CHECK(fish.at(i, j) == Catch::Approx(123.0).epsilon(1e-12));
      else
        CHECK(fish.at(i, j) == 0.0);
    }
}

TEST_CASE("fisheye yaw is periodic bitwise") {
  std::mt19937_64 gen(4);
  LuminanceMap pan = make_map(92, 46);
  for (auto& v : pan.values) v = 1.0 + 500.0 * (gen() >> 40);
  FisheyeImage a = panorama_to_fisheye(pan, 0.0, 48);
  FisheyeImage b = panorama_to_fisheye(pan, 360.0, 48);
  CHECK(a.values == b.values);
  FisheyeImage c = panorama_to_fisheye(pan, 77.0, 48);
  FisheyeImage d = panorama_to_fisheye(pan, 437.0, 48);
  CHECK(c.values == d.values);
  CHECK_THROWS_AS(panorama_to_fisheye(pan, 0.0, 1), std::invalid_argument);
}

TEST_CASE("fisheye pixels outside the circle are invalid and zero") {
  LuminanceMap pan = make_map(92, 46, 10.0);
  FisheyeImage fish = panorama_to_fisheye(pan, 0.0, 33);
  CHECK_FALSE(fish.valid[0]);          // image corner
  CHECK(fish.at(0, 0) == 0.0);
  CHECK(fish.valid[16 * 33 + 16]);     // center
}

TEST_CASE("fisheye center looks along the view axis") {
  // panorama with a bright column at the yaw-90 longitude
  LuminanceMap pan = make_map(360, 180, 1.0);
  // yaw 90 -> +x axis -> longitude 90 deg -> px = 270 area
  for (int py = 0; py < 180; ++py) pan.at(269, py) = 1000.0;
  FisheyeImage fish = panorama_to_fisheye(pan, 90.0, 65);
  CHECK(fish.at(32, 32) > 100.0);  // center pixel samples the bright column
}

TEST_CASE("vertical illuminance of a uniform panorama is pi times L") {
  LuminanceMap pan = make_map(460, 230, 100.0);
  for (double yaw : {0.0, 36.0, 144.0, 288.0}) {
    double ev = vertical_illuminance(pan, yaw);
    CHECK(std::abs(ev - 100.0 * kPi) / (100.0 * kPi) < 0.005);
  }
}

TEST_CASE("vertical illuminance is linear and zero on dark maps") {
  LuminanceMap zero = make_map(92, 46, 0.0);
  CHECK(vertical_illuminance(zero, 0.0) == 0.0);
  std::mt19937_64 gen(9);
  LuminanceMap pan = make_map(92, 46);
  for (auto& v : pan.values) v = (gen() >> 44) + 1.0;
  LuminanceMap doubled = pan;
  for (auto& v : doubled.values) v *= 2.0;
  CHECK(vertical_illuminance(doubled, 36.0) ==
        Catch::Approx(2.0 * vertical_illuminance(pan, 36.0)).epsilon(1e-12));
}

TEST_CASE("vertical illuminance is yaw-invariant for horizontally constant maps") {
  LuminanceMap pan = make_map(460, 230);
  for (int py = 0; py < 230; ++py)
    for (int px = 0; px < 460; ++px) pan.at(px, py) = 1.0 + py * 3.0;
  double ref = vertical_illuminance(pan, 0.0);
  for (double yaw : {36.0, 90.0, 223.0})
    CHECK(vertical_illuminance(pan, yaw) ==
          Catch::Approx(ref).epsilon(1e-6));
}
