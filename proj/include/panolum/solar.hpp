#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "panolum/common.hpp"
#include "panolum/epw.hpp"

namespace panolum {

// Local standard time; no daylight-saving handling.
struct Timestamp {
  int year = 2000;
  int month = 1;
  int day = 1;
  int hour = 0;  // 0..23
  int minute = 0;

  double decimal_hour() const { return hour + minute / 60.0; }

  friend bool operator<(const Timestamp& a, const Timestamp& b) {
    return std::tie(a.year, a.month, a.day, a.hour, a.minute) <
           std::tie(b.year, b.month, b.day, b.hour, b.minute);
  }
  friend bool operator==(const Timestamp& a, const Timestamp& b) {
    return std::tie(a.year, a.month, a.day, a.hour, a.minute) ==
           std::tie(b.year, b.month, b.day, b.hour, b.minute);
  }
};

inline bool is_leap_year(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int day_of_year(int year, int month, int day) {
  static constexpr int cum[12] = {0,   31,  59,  90,  120, 151,
                                  181, 212, 243, 273, 304, 334};
  int n = cum[month - 1] + day;
  if (month > 2 && is_leap_year(year)) ++n;
  return n;
}

struct SunPosition {
  double altitude = 0.0;  // degrees above horizon
  double azimuth = 0.0;   // degrees from south, west positive, (-180, 180]
};

// Days from the J2000 epoch (2000-01-01 00:00), calendar arithmetic only.
inline double days_since_j2000(int year, int month, int day, double hours) {
  long a = (month - 14) / 12;
  long jdn = (1461L * (year + 4800 + a)) / 4 +
             (367L * (month - 2 - 12 * a)) / 12 -
             (3 * ((year + 4900 + a) / 100)) / 4 + day - 32075;
  return (jdn - 2451545L) - 0.5 + hours / 24.0;
}

// Spencer-series solar geometry: declination and equation of time from the
// fractional day angle, then hour angle from longitude/timezone-corrected
// solar time. The day angle folds over the tropical year from the J2000
// epoch, which keeps the seasonal phase within the leap cycle and holds the
// series to a fraction of a degree across 1950-2050 -- coarse next to the
// 4x4 light-domain binning this feeds, but stable.
inline SunPosition sun_position(const Site& site, const Timestamp& ts) {
  constexpr double kTropicalYear = 365.2421896;
  const double clock = ts.decimal_hour();
  const double days = days_since_j2000(ts.year, ts.month, ts.day, clock);
  double frac = std::fmod(days / kTropicalYear, 1.0);
  if (frac < 0.0) frac += 1.0;
  const double gamma = 2.0 * kPi * frac;

  const double decl =
      0.006918 - 0.399912 * std::cos(gamma) + 0.070257 * std::sin(gamma) -
      0.006758 * std::cos(2 * gamma) + 0.000907 * std::sin(2 * gamma) -
      0.002697 * std::cos(3 * gamma) + 0.00148 * std::sin(3 * gamma);

  const double eot_minutes =
      229.18 * (0.000075 + 0.001868 * std::cos(gamma) -
                0.032077 * std::sin(gamma) - 0.014615 * std::cos(2 * gamma) -
                0.04089 * std::sin(2 * gamma));

  const double solar_time =
      clock + eot_minutes / 60.0 + (site.longitude - 15.0 * site.timezone) / 15.0;
  const double hour_angle = deg2rad(15.0 * (solar_time - 12.0));

  const double lat = deg2rad(site.latitude);
  const double sin_alt = std::sin(lat) * std::sin(decl) +
                         std::cos(lat) * std::cos(decl) * std::cos(hour_angle);
  SunPosition pos;
  pos.altitude = rad2deg(std::asin(std::clamp(sin_alt, -1.0, 1.0)));
  pos.azimuth = rad2deg(std::atan2(
      std::sin(hour_angle),
      std::cos(hour_angle) * std::sin(lat) - std::tan(decl) * std::cos(lat)));
  return pos;
}

// One daylight hour of the 4-D light domain: sun position plus the sky
// condition read from weather data.
struct SkyState {
  Timestamp time;
  double altitude = 0.0;  // al, degrees
  double azimuth = 0.0;   // az, degrees from south, west positive
  double dni = 0.0;       // dir, W/m2
  double dhi = 0.0;       // dif, W/m2
};

// EPW hour H covers (H-1, H]; the state is evaluated at the interval center
// H - 0.5. Keeps only states with the sun up and a non-dark sky.
inline std::vector<SkyState> annual_sky_states(
    const Site& site, const std::vector<WeatherRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("annual_sky_states: no weather records");
  std::vector<SkyState> states;
  states.reserve(records.size() / 2);
  for (const auto& rec : records) {
    Timestamp ts{rec.year, rec.month, rec.day, rec.hour - 1, 30};
    SunPosition pos = sun_position(site, ts);
    if (pos.altitude <= 0.0) continue;
    if (rec.dni + rec.dhi <= 0.0) continue;
    states.push_back({ts, pos.altitude, pos.azimuth, rec.dni, rec.dhi});
  }
  return states;
}

}  // namespace panolum
