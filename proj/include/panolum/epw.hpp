#pragma once

#include <istream>
#include <string>
#include <vector>

#include "panolum/common.hpp"

namespace panolum {

struct Site {
  double latitude = 0.0;   // degrees, north positive
  double longitude = 0.0;  // degrees, east positive
  double timezone = 0.0;   // hours offset from UTC
  double elevation = 0.0;  // meters
};

inline void validate_site(const Site& s) {
  if (s.latitude < -90.0 || s.latitude > 90.0)
    throw std::invalid_argument("site latitude out of [-90, 90]");
  if (s.longitude < -180.0 || s.longitude > 180.0)
    throw std::invalid_argument("site longitude out of [-180, 180]");
  if (s.timezone < -12.0 || s.timezone > 14.0)
    throw std::invalid_argument("site timezone out of [-12, 14]");
}

// One hourly EPW record. `hour` keeps the EPW hour-ending convention
// (1..24); the interval-center timestamp is derived downstream.
struct WeatherRecord {
  int year = 0;
  int month = 0;
  int day = 0;
  int hour = 0;
  double dni = 0.0;  // direct normal irradiance, W/m2
  double dhi = 0.0;  // diffuse horizontal irradiance, W/m2
};

struct EpwData {
  Site site;
  std::vector<WeatherRecord> records;
  int missing_values = 0;  // 9999 sentinels replaced by 0
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline double parse_field_double(const std::string& s, int line_no,
                                 const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    return v;
  } catch (const std::exception&) {
    throw FormatError("epw line " + std::to_string(line_no) + ": bad " +
                      what + " value '" + s + "'");
  }
}

}  // namespace detail

// Parses an EnergyPlus weather file: LOCATION header for the site, then
// hourly records with DNI at field 15 and DHI at field 16 (1-indexed, Year
// first). The 9999 missing-value sentinel becomes 0 and is counted.
inline EpwData parse_epw(std::istream& in) {
  EpwData data;
  std::string line;
  int line_no = 0;

  if (!std::getline(in, line)) throw FormatError("epw: empty stream");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("LOCATION,", 0) != 0)
    throw FormatError("epw: first line must begin with LOCATION,");
  {
    auto fields = detail::split_csv(line);
    if (fields.size() < 10)
      throw FormatError("epw: LOCATION line needs at least 10 fields");
    data.site.latitude = detail::parse_field_double(fields[6], 1, "latitude");
    data.site.longitude =
        detail::parse_field_double(fields[7], 1, "longitude");
    data.site.timezone = detail::parse_field_double(fields[8], 1, "timezone");
    data.site.elevation =
        detail::parse_field_double(fields[9], 1, "elevation");
    validate_site(data.site);
  }

  // Remaining 7 header lines (design conditions through data periods).
  for (int i = 0; i < 7; ++i) {
    if (!std::getline(in, line))
      throw FormatError("epw: truncated header (expected 8 header lines)");
    ++line_no;
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_csv(line);
    if (fields.size() < 20)
      throw FormatError("epw line " + std::to_string(line_no) +
                        ": record has fewer than 20 fields");
    WeatherRecord rec;
    rec.year = static_cast<int>(
        detail::parse_field_double(fields[0], line_no, "year"));
    rec.month = static_cast<int>(
        detail::parse_field_double(fields[1], line_no, "month"));
    rec.day = static_cast<int>(
        detail::parse_field_double(fields[2], line_no, "day"));
    rec.hour = static_cast<int>(
        detail::parse_field_double(fields[3], line_no, "hour"));
    if (rec.month < 1 || rec.month > 12 || rec.day < 1 || rec.day > 31 ||
        rec.hour < 1 || rec.hour > 24)
      throw FormatError("epw line " + std::to_string(line_no) +
                        ": timestamp fields out of range");
    auto irradiance = [&](const std::string& s, const char* what) {
      double v = detail::parse_field_double(s, line_no, what);
      if (v == 9999.0) {
        ++data.missing_values;
        return 0.0;
      }
      return v < 0.0 ? 0.0 : v;
    };
    rec.dni = irradiance(fields[14], "DNI");
    rec.dhi = irradiance(fields[15], "DHI");
    data.records.push_back(rec);
  }
  return data;
}

}  // namespace panolum
