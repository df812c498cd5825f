#pragma once

// Deterministic synthetic TMY-style weather for tests: a Seattle year with
// seasonal cloudiness driving the direct/diffuse irradiance split. Every
// hour whose interval center has the sun up gets nonzero irradiance, so the
// annual daylight-state count is the astronomic one.

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "panolum/epw.hpp"
#include "panolum/random.hpp"
#include "panolum/solar.hpp"

namespace testsupport {

inline panolum::Site seattle_site() { return {47.6, -122.3, -8.0, 56.0}; }

inline int days_in_month(int year, int month) {
  static constexpr int days[12] = {31, 28, 31, 30, 31, 30,
                                   31, 31, 30, 31, 30, 31};
  if (month == 2 && panolum::is_leap_year(year)) return 29;
  return days[month - 1];
}

// Monthly mean cloud fraction, roughly Seattle-shaped: heavy winter
// overcast, clearer July/August.
inline double seattle_cloud_mean(int month) {
  static constexpr double mean[12] = {0.82, 0.78, 0.72, 0.62, 0.55, 0.48,
                                      0.36, 0.38, 0.50, 0.68, 0.80, 0.84};
  return mean[month - 1];
}

inline std::string synthetic_seattle_epw(uint64_t seed = 7, int year = 2017) {
  using namespace panolum;
  const Site site = seattle_site();
  std::mt19937_64 gen(seed);

  std::ostringstream out;
  out << "LOCATION,Seattle,WA,USA,SYNTHETIC-TMY,727930,47.6,-122.3,-8.0,56.0\n"
      << "DESIGN CONDITIONS,0\n"
      << "TYPICAL/EXTREME PERIODS,0\n"
      << "GROUND TEMPERATURES,0\n"
      << "HOLIDAYS/DAYLIGHT SAVINGS,No,0,0,0\n"
      << "COMMENTS 1,synthetic weather for pipeline tests\n"
      << "COMMENTS 2,\n"
      << "DATA PERIODS,1,1,Data,Sunday,1/1,12/31\n";

  for (int month = 1; month <= 12; ++month) {
    for (int day = 1; day <= days_in_month(year, month); ++day) {
      double cloud_day = std::clamp(
          seattle_cloud_mean(month) + 0.30 * (rng::uniform01(gen) - 0.5),
          0.05, 0.98);
      for (int hour = 1; hour <= 24; ++hour) {
        double cloud = std::clamp(
            cloud_day + 0.10 * (rng::uniform01(gen) - 0.5), 0.02, 1.0);
        Timestamp center{year, month, day, hour - 1, 30};
        double al = sun_position(site, center).altitude;
        int dni = 0, dhi = 0;
        if (al > 0.0) {
          double sin_al = std::sin(deg2rad(al));
          double air_mass = 1.0 / std::max(sin_al, 0.05);
          double dni_clear = 1100.0 * std::exp(-0.21 * air_mass);
          dni = static_cast<int>(
              std::lround(dni_clear * std::pow(1.0 - cloud, 2.5)));
          double dhi_v =
              sin_al * (60.0 + 520.0 * cloud * (1.0 - 0.65 * cloud));
          dhi = static_cast<int>(std::lround(std::min(dhi_v, 660.0)));
          dhi = std::max(dhi, 5);  // sun up never reads as a dark sky
        }
        int ghi = static_cast<int>(std::lround(
            dni * std::max(0.0, std::sin(deg2rad(al))) + dhi));
        // Fields: year,month,day,hour,minute,flags,6 unused met fields,
        // horizontal IR, GHI, DNI(15), DHI(16), trailing fillers.
        out << year << ',' << month << ',' << day << ',' << hour << ",0,?,"
            << "10.0,5.0,70,101325,0,0,0," << ghi << ',' << dni << ',' << dhi
            << ",0,0,0,0,0,0,0,0,0\n";
      }
    }
  }
  return out.str();
}

inline panolum::EpwData parse_synthetic_seattle(uint64_t seed = 7) {
  std::istringstream in(synthetic_seattle_epw(seed));
  return panolum::parse_epw(in);
}

}  // namespace testsupport
