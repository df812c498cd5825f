#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "panolum/common.hpp"
#include "panolum/random.hpp"
#include "panolum/solar.hpp"

namespace panolum {

// Normalization spans of the 4-D light domain (altitude, azimuth, direct,
// diffuse). 1400 and 700 W/m2 bound terrestrial direct/diffuse irradiance.
struct DomainBounds {
  double altitude_max = 90.0;
  double dni_max = 1400.0;
  double dhi_max = 700.0;
};

inline std::array<double, 4> normalize_light_coords(
    const SkyState& s, const DomainBounds& b = {}) {
  auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };
  return {unit(s.altitude / b.altitude_max), unit((s.azimuth + 180.0) / 360.0),
          unit(s.dni / b.dni_max), unit(s.dhi / b.dhi_max)};
}

struct LightPoint {
  int index = 0;
  std::array<double, 4> coords{};
};

inline std::vector<LightPoint> normalize_domain(
    const std::vector<SkyState>& states, const DomainBounds& bounds = {}) {
  if (states.empty())
    throw std::invalid_argument("normalize_domain: empty state list");
  std::vector<LightPoint> points(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    points[i] = {static_cast<int>(i),
                 normalize_light_coords(states[i], bounds)};
  return points;
}

namespace detail {

inline double sq_dist(const std::array<double, 4>& a,
                      const std::array<double, 4>& b) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

struct KMeansResult {
  std::vector<int> assignment;                  // point -> cluster
  std::vector<std::array<double, 4>> centroids;
  std::vector<double> objective_history;        // WCSS after each assignment
  std::vector<int> selected;                    // nearest member per cluster
};

// k-means++ seeding followed by Lloyd iterations (at most 100). Each final
// cluster is represented by the member nearest its centroid, lowest index on
// ties, so selections are always real samples.
inline KMeansResult kmeans_cluster(const std::vector<LightPoint>& points,
                                   int k, uint64_t seed) {
  const int n = static_cast<int>(points.size());
  if (k < 1 || k > n)
    throw std::invalid_argument("kmeans: k must be in [1, |points|]");

  KMeansResult res;
  std::mt19937_64 gen(seed);

  // k-means++ initialization.
  std::vector<std::array<double, 4>> centers;
  centers.reserve(k);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  centers.push_back(points[rng::uniform_index(gen, n)].coords);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], detail::sq_dist(points[i].coords,
                                              centers.back()));
      total += d2[i];
    }
    int pick = -1;
    if (total > 0.0) {
      double r = rng::uniform01(gen) * total;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = n - 1;
    } else {
      // All remaining points coincide with a center; spread over indices.
      pick = static_cast<int>(centers.size()) % n;
    }
    centers.push_back(points[pick].coords);
  }

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    double wcss = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = detail::sq_dist(points[i].coords, centers[0]);
      for (int c = 1; c < k; ++c) {
        double d = detail::sq_dist(points[i].coords, centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      wcss += best_d;
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    res.objective_history.push_back(wcss);
    if (!changed) break;

    std::vector<std::array<double, 4>> sums(k, {0, 0, 0, 0});
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < 4; ++d) sums[assign[i]][d] += points[i].coords[d];
      ++counts[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseed an empty cluster at the point farthest from its centroid.
        int far_i = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          double d = detail::sq_dist(points[i].coords, centers[assign[i]]);
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        centers[c] = points[far_i].coords;
      } else {
        for (int d = 0; d < 4; ++d) centers[c][d] = sums[c][d] / counts[c];
      }
    }
  }

  res.assignment = assign;
  res.centroids = centers;
  res.selected.assign(k, -1);
  std::vector<double> best_d(k, std::numeric_limits<double>::infinity());
  for (int i = 0; i < n; ++i) {
    int c = assign[i];
    double d = detail::sq_dist(points[i].coords, centers[c]);
    if (d < best_d[c]) {
      best_d[c] = d;
      res.selected[c] = i;
    }
  }
  // Clusters can be empty only if k-means++ duplicated a center on
  // degenerate data; fill from unused indices to keep k distinct picks.
  std::set<int> used(res.selected.begin(), res.selected.end());
  for (int c = 0; c < k; ++c) {
    if (res.selected[c] >= 0) continue;
    for (int i = 0; i < n; ++i) {
      if (!used.count(i)) {
        res.selected[c] = i;
        used.insert(i);
        break;
      }
    }
  }
  return res;
}

inline std::vector<int> kmeans_select(const std::vector<LightPoint>& points,
                                      int k, uint64_t seed) {
  auto selected = kmeans_cluster(points, k, seed).selected;
  std::sort(selected.begin(), selected.end());
  return selected;
}

// A calendar window of consecutive days centered on an anchor date.
struct DayWindow {
  int month = 1;
  int day = 1;
  int ndays = 1;
};

enum class ScheduleKind { kKMeans, kMonth, kDays, kExplicit };

inline const char* to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::kKMeans: return "kmeans";
    case ScheduleKind::kMonth: return "month";
    case ScheduleKind::kDays: return "days";
    case ScheduleKind::kExplicit: return "explicit";
  }
  return "unknown";
}

struct ScheduleParams {
  int k = 200;                        // kmeans
  int month = 3;                      // month
  std::vector<DayWindow> windows;     // days
  double window_start_hour = -1.0;    // days: clock window [start, start+12)
  std::vector<int> indices;           // explicit
};

struct Schedule {
  ScheduleKind kind = ScheduleKind::kKMeans;
  ScheduleParams params;
  uint64_t seed = 0;
  std::vector<int> train;
  std::vector<int> validation;
};

namespace detail {

inline int wrap_doy(int doy, int days_in_year) {
  return ((doy - 1) % days_in_year + days_in_year) % days_in_year + 1;
}

inline bool in_day_window(const Timestamp& ts, const DayWindow& win) {
  int days_in_year = is_leap_year(ts.year) ? 366 : 365;
  int doy = day_of_year(ts.year, ts.month, ts.day);
  int anchor = day_of_year(ts.year, win.month, win.day);
  int start = anchor - (win.ndays - 1) / 2;
  for (int d = 0; d < win.ndays; ++d)
    if (doy == wrap_doy(start + d, days_in_year)) return true;
  return false;
}

}  // namespace detail

// Removes a seeded 10% validation draw from the train indices (floored, at
// least one sample when two or more are available).
inline void split_validation(Schedule& sched, uint64_t seed) {
  std::size_t n = sched.train.size();
  std::size_t n_val = n / 10;
  if (n_val == 0 && n >= 2) n_val = 1;
  if (n_val == 0) return;
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<int> order = sched.train;
  rng::shuffle(order, gen);
  std::set<int> val(order.begin(), order.begin() + n_val);
  std::vector<int> train;
  train.reserve(n - n_val);
  for (int idx : sched.train)
    if (!val.count(idx)) train.push_back(idx);
  sched.train = std::move(train);
  sched.validation.assign(val.begin(), val.end());
}

inline Schedule build_schedule(const std::vector<SkyState>& states,
                               ScheduleKind kind, const ScheduleParams& params,
                               uint64_t seed) {
  if (states.empty())
    throw std::invalid_argument("build_schedule: empty state list");
  Schedule sched;
  sched.kind = kind;
  sched.params = params;
  sched.seed = seed;

  switch (kind) {
    case ScheduleKind::kKMeans: {
      sched.train = kmeans_select(normalize_domain(states), params.k, seed);
      break;
    }
    case ScheduleKind::kMonth: {
      if (params.month < 1 || params.month > 12)
        throw std::invalid_argument("build_schedule: month out of range");
      for (std::size_t i = 0; i < states.size(); ++i)
        if (states[i].time.month == params.month)
          sched.train.push_back(static_cast<int>(i));
      break;
    }
    case ScheduleKind::kDays: {
      if (params.windows.empty())
        throw std::invalid_argument("build_schedule: no day windows");
      for (const auto& win : params.windows)
        if (win.ndays < 1)
          throw std::invalid_argument("build_schedule: empty day window");
      for (std::size_t i = 0; i < states.size(); ++i) {
        const SkyState& s = states[i];
        bool in_any = false;
        for (const auto& win : params.windows)
          if (detail::in_day_window(s.time, win)) {
            in_any = true;
            break;
          }
        if (!in_any) continue;
        if (params.window_start_hour >= 0.0) {
          double h = s.time.decimal_hour();
          if (h < params.window_start_hour ||
              h >= params.window_start_hour + 12.0)
            continue;
        }
        sched.train.push_back(static_cast<int>(i));
      }
      break;
    }
    case ScheduleKind::kExplicit: {
      sched.train = params.indices;
      std::sort(sched.train.begin(), sched.train.end());
      for (int idx : sched.train)
        if (idx < 0 || idx >= static_cast<int>(states.size()))
          throw std::invalid_argument("build_schedule: index out of range");
      break;
    }
  }
  if (sched.train.empty())
    throw std::invalid_argument("build_schedule: schedule selected no states");
  split_validation(sched, seed);
  return sched;
}

// Anchor dates for the equinox/solstice schedules: Mar 20, Jun 21, Sep 22,
// Dec 21. The day windows select hourly daylight states; at mid latitudes
// the long summer and short winter days balance around the 12-hour
// equinoxes, which is what yields the 144/108/48 sample counts.
inline std::vector<DayWindow> set3a_windows() {
  return {{3, 20, 3}, {6, 21, 3}, {9, 22, 3}, {12, 21, 3}};
}

inline std::vector<DayWindow> set3b_windows() {
  return {{3, 20, 3}, {6, 21, 3}, {12, 21, 3}};
}

inline std::vector<DayWindow> set3c_windows() {
  return {{3, 20, 1}, {6, 21, 1}, {9, 22, 1}, {12, 21, 1}};
}

inline Schedule build_set3_schedule(const std::vector<SkyState>& states,
                                    char variant, uint64_t seed) {
  ScheduleParams params;
  switch (variant) {
    case 'a': params.windows = set3a_windows(); break;
    case 'b': params.windows = set3b_windows(); break;
    case 'c': params.windows = set3c_windows(); break;
    default:
      throw std::invalid_argument("set3 variant must be a, b, or c");
  }
  return build_schedule(states, ScheduleKind::kDays, params, seed);
}

// Seeded test draw from the states not reserved by the schedule.
inline std::vector<int> split_test(const std::vector<SkyState>& states,
                                   const Schedule& sched, std::size_t n_test,
                                   uint64_t seed) {
  std::set<int> reserved(sched.train.begin(), sched.train.end());
  reserved.insert(sched.validation.begin(), sched.validation.end());
  std::vector<int> candidates;
  candidates.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    if (!reserved.count(static_cast<int>(i)))
      candidates.push_back(static_cast<int>(i));
  if (n_test > candidates.size())
    throw std::invalid_argument("split_test: not enough unreserved states");
  std::mt19937_64 gen(seed ^ 0xd1b54a32d192ed03ull);
  rng::shuffle(candidates, gen);
  candidates.resize(n_test);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

inline nlohmann::json schedule_to_json(const Schedule& sched) {
  nlohmann::json j;
  j["kind"] = to_string(sched.kind);
  j["seed"] = sched.seed;
  nlohmann::json p;
  switch (sched.kind) {
    case ScheduleKind::kKMeans:
      p["k"] = sched.params.k;
      break;
    case ScheduleKind::kMonth:
      p["month"] = sched.params.month;
      break;
    case ScheduleKind::kDays: {
      nlohmann::json wins = nlohmann::json::array();
      for (const auto& w : sched.params.windows)
        wins.push_back({{"month", w.month}, {"day", w.day}, {"ndays", w.ndays}});
      p["windows"] = wins;
      if (sched.params.window_start_hour >= 0.0)
        p["window_start_hour"] = sched.params.window_start_hour;
      break;
    }
    case ScheduleKind::kExplicit:
      p["indices"] = sched.params.indices;
      break;
  }
  j["params"] = p;
  j["train"] = sched.train;
  j["validation"] = sched.validation;
  return j;
}

inline Schedule schedule_from_json(const nlohmann::json& j) {
  Schedule sched;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "kmeans")
    sched.kind = ScheduleKind::kKMeans;
  else if (kind == "month")
    sched.kind = ScheduleKind::kMonth;
  else if (kind == "days")
    sched.kind = ScheduleKind::kDays;
  else if (kind == "explicit")
    sched.kind = ScheduleKind::kExplicit;
  else
    throw FormatError("schedule: unknown kind '" + kind + "'");
  sched.seed = j.value("seed", uint64_t{0});
  if (j.contains("params")) {
    const auto& p = j["params"];
    sched.params.k = p.value("k", 200);
    sched.params.month = p.value("month", 3);
    sched.params.window_start_hour = p.value("window_start_hour", -1.0);
    if (p.contains("windows"))
      for (const auto& w : p["windows"])
        sched.params.windows.push_back({w.at("month").get<int>(),
                                        w.at("day").get<int>(),
                                        w.at("ndays").get<int>()});
    if (p.contains("indices"))
      sched.params.indices = p["indices"].get<std::vector<int>>();
  }
  sched.train = j.at("train").get<std::vector<int>>();
  sched.validation = j.at("validation").get<std::vector<int>>();
  std::set<int> train_set(sched.train.begin(), sched.train.end());
  for (int idx : sched.validation)
    if (train_set.count(idx))
      throw FormatError("schedule: train and validation overlap");
  return sched;
}

}  // namespace panolum
