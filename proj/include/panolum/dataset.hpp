#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "panolum/common.hpp"
#include "panolum/encoding.hpp"
#include "panolum/epw.hpp"
#include "panolum/hdr.hpp"
#include "panolum/oracle.hpp"
#include "panolum/parallel.hpp"
#include "panolum/sampling.hpp"
#include "panolum/solar.hpp"

namespace panolum {

struct SampleTriple {
  SkyState state;
  LuminanceMap interior;
  LuminanceMap sky;
  LuminanceMap sun;
};

struct DatasetEntry {
  SkyState state;
  std::string interior_file;
  std::string sky_file;
  std::string sun_file;
};

// On-disk dataset: one directory with index.csv plus three HDR panoramas
// per daylight state. Samples load lazily.
struct Dataset {
  std::filesystem::path dir;
  std::vector<DatasetEntry> entries;
  int width = 0;
  int height = 0;

  std::size_t size() const { return entries.size(); }

  std::vector<SkyState> states() const {
    std::vector<SkyState> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.state);
    return out;
  }
};

inline std::string timestamp_string(const Timestamp& ts) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d%02d%02d_%02d%02d", ts.year, ts.month,
                ts.day, ts.hour, ts.minute);
  return buf;
}

inline Timestamp parse_timestamp_string(const std::string& s) {
  Timestamp ts;
  if (s.size() != 13 ||
      std::sscanf(s.c_str(), "%4d%2d%2d_%2d%2d", &ts.year, &ts.month, &ts.day,
                  &ts.hour, &ts.minute) != 5)
    throw FormatError("dataset: bad timestamp '" + s + "'");
  return ts;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace detail

inline LuminanceMap load_map(const Dataset& ds, const std::string& file) {
  return luminance_map(read_hdr_file(ds.dir / file));
}

inline LuminanceMap load_interior(const Dataset& ds, std::size_t i) {
  return load_map(ds, ds.entries.at(i).interior_file);
}

inline SampleTriple load_sample(const Dataset& ds, std::size_t i) {
  const DatasetEntry& e = ds.entries.at(i);
  return {e.state, load_map(ds, e.interior_file), load_map(ds, e.sky_file),
          load_map(ds, e.sun_file)};
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  ds.dir = dir;
  std::ifstream in(dir / "index.csv");
  if (!in) throw DataError("dataset: cannot open " + (dir / "index.csv").string());
  std::string line;
  if (!std::getline(in, line))
    throw FormatError("dataset: empty index.csv");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_csv(line);
    if (fields.size() < 8)
      throw FormatError("dataset: index.csv line " + std::to_string(line_no) +
                        " has fewer than 8 fields");
    DatasetEntry e;
    e.state.time = parse_timestamp_string(fields[0]);
    e.state.altitude = std::stod(fields[1]);
    e.state.azimuth = std::stod(fields[2]);
    e.state.dni = std::stod(fields[3]);
    e.state.dhi = std::stod(fields[4]);
    e.interior_file = fields[5];
    e.sky_file = fields[6];
    e.sun_file = fields[7];
    ds.entries.push_back(std::move(e));
  }
  if (ds.entries.empty()) throw DataError("dataset: no entries in index.csv");
  LuminanceMap first = load_interior(ds, 0);
  ds.width = first.width;
  ds.height = first.height;
  return ds;
}

namespace detail {

inline void write_map_atomic(const LuminanceMap& map,
                             const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  write_hdr_file(to_gray_image(map), tmp);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw DataError("dataset: cannot move " + tmp.string() + ": " +
                    ec.message());
}

}  // namespace detail

// Renders every annual daylight state of the weather data into `out_dir`:
// three HDR files per state plus one index.csv. Rendering is deterministic,
// so re-running reproduces the same bytes.
inline Dataset generate_dataset(const SceneSpec& scene, const Site& site,
                                const std::vector<WeatherRecord>& records,
                                int width, int height,
                                const std::filesystem::path& out_dir) {
  validate_scene(scene);
  std::vector<SkyState> states = annual_sky_states(site, records);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw DataError("dataset: cannot create " + out_dir.string() + ": " +
                    ec.message());

  Dataset ds;
  ds.dir = out_dir;
  ds.width = width;
  ds.height = height;
  ds.entries.resize(states.size());

  parallel_for(states.size(), 8, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const SkyState& state = states[i];
      SampleMaps maps = render_triple(scene, state, width, height);
      std::string stamp = timestamp_string(state.time);
      DatasetEntry& e = ds.entries[i];
      e.state = state;
      e.interior_file = stamp + "_interior.hdr";
      e.sky_file = stamp + "_sky.hdr";
      e.sun_file = stamp + "_sun.hdr";
      detail::write_map_atomic(maps.interior, out_dir / e.interior_file);
      detail::write_map_atomic(maps.sky, out_dir / e.sky_file);
      detail::write_map_atomic(maps.sun, out_dir / e.sun_file);
    }
  });

  std::ofstream index(out_dir / "index.csv", std::ios::trunc);
  if (!index)
    throw DataError("dataset: cannot write " +
                    (out_dir / "index.csv").string());
  index << "timestamp,al,az,dni,dhi,interior,sky,sun\n";
  for (const auto& e : ds.entries) {
    index << timestamp_string(e.state.time) << ','
          << detail::format_double(e.state.altitude) << ','
          << detail::format_double(e.state.azimuth) << ','
          << detail::format_double(e.state.dni) << ','
          << detail::format_double(e.state.dhi) << ',' << e.interior_file
          << ',' << e.sky_file << ',' << e.sun_file << '\n';
  }
  if (!index) throw DataError("dataset: index.csv write failed");
  return ds;
}

// Per-pixel mean encoded interior luminance over the schedule's train set.
inline AvgMap avg_map_for_schedule(const Dataset& ds, const Schedule& sched,
                                   const EncodingConstants& enc = {}) {
  if (sched.train.empty())
    throw std::invalid_argument("avg map: schedule train set is empty");
  AvgMapAccumulator acc(ds.width, ds.height, enc);
  for (int idx : sched.train) acc.add(load_interior(ds, idx));
  return acc.finish();
}

}  // namespace panolum
