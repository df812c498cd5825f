#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "panolum/dataset.hpp"
#include "panolum/training.hpp"

using namespace panolum;
namespace fs = std::filesystem;

namespace {

// Three March days of hourly records; enough daylight states to exercise
// the dataset plumbing quickly.
std::vector<WeatherRecord> mini_records() {
  std::vector<WeatherRecord> records;
  for (int day = 20; day <= 22; ++day)
    for (int hour = 1; hour <= 24; ++hour)
      records.push_back({2017, 3, day, hour, 300.0 + hour, 90.0});
  return records;
}

Site seattle() { return {47.6, -122.3, -8.0, 56.0}; }

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "panolum_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("timestamp strings round trip") {
  Timestamp ts{2017, 3, 5, 7, 30};
  CHECK(timestamp_string(ts) == "20170305_0730");
  CHECK(parse_timestamp_string("20170305_0730") == ts);
  CHECK_THROWS_AS(parse_timestamp_string("2017-03-05"), FormatError);
}

TEST_CASE("generate_dataset writes a loadable, deterministic tree") {
  fs::path dir = fresh_dir("gen_a");
  Dataset ds = generate_dataset(SceneSpec{}, seattle(), mini_records(), 24,
                                12, dir);
  auto states = annual_sky_states(seattle(), mini_records());
  REQUIRE(ds.size() == states.size());
  CHECK(ds.size() >= 30);

  Dataset loaded = load_dataset(dir);
  REQUIRE(loaded.size() == ds.size());
  CHECK(loaded.width == 24);
  CHECK(loaded.height == 12);
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded.entries[i].state.time == ds.entries[i].state.time);
    CHECK(loaded.entries[i].state.altitude ==
          Catch::Approx(ds.entries[i].state.altitude).epsilon(1e-9));
    CHECK(fs::exists(dir / loaded.entries[i].interior_file));
  }

  // regeneration is byte-identical
  fs::path dir2 = fresh_dir("gen_b");
  generate_dataset(SceneSpec{}, seattle(), mini_records(), 24, 12, dir2);
  CHECK(slurp(dir / "index.csv") == slurp(dir2 / "index.csv"));
  const auto& e = ds.entries[ds.size() / 2];
  for (const std::string& f : {e.interior_file, e.sky_file, e.sun_file})
    CHECK(slurp(dir / f) == slurp(dir2 / f));
}

TEST_CASE("loaded samples match the rendered maps within codec error") {
  fs::path dir = fresh_dir("gen_c");
  Dataset ds = generate_dataset(SceneSpec{}, seattle(), mini_records(), 24,
                                12, dir);
  std::size_t i = ds.size() / 3;
  SampleTriple sample = load_sample(ds, i);
  SampleMaps direct = render_triple(SceneSpec{}, ds.entries[i].state, 24, 12);
  REQUIRE(sample.interior.values.size() == direct.interior.values.size());
  for (std::size_t p = 0; p < sample.interior.values.size(); ++p) {
    double truth = direct.interior.values[p];
    if (truth == 0.0)
      CHECK(sample.interior.values[p] == 0.0);
    else
      CHECK(std::abs(sample.interior.values[p] - truth) / truth < 0.005);
  }
}

TEST_CASE("avg map for a schedule averages encoded train interiors") {
  fs::path dir = fresh_dir("gen_d");
  Dataset ds = generate_dataset(SceneSpec{}, seattle(), mini_records(), 24,
                                12, dir);
  ScheduleParams p;
  p.indices = {0, 1};
  Schedule sched;
  sched.kind = ScheduleKind::kExplicit;
  sched.train = {0, 1};
  AvgMap avg = avg_map_for_schedule(ds, sched);
  LuminanceMap i0 = load_interior(ds, 0);
  LuminanceMap i1 = load_interior(ds, 1);
  for (std::size_t i = 0; i < avg.values.size(); ++i)
    CHECK(avg.values[i] ==
          Catch::Approx(0.5 * (encode_luminance(i0.values[i]) +
                               encode_luminance(i1.values[i])))
              .epsilon(1e-12));
}

TEST_CASE("dataset loader rejects broken indices") {
  fs::path dir = fresh_dir("bad_index");
  {
    std::ofstream out(dir / "index.csv");
    out << "timestamp,al,az,dni,dhi,interior,sky,sun\n";
    out << "20170101_1230,10,0,100\n";  // short row
  }
  CHECK_THROWS_AS(load_dataset(dir), FormatError);
  fs::path missing = fresh_dir("no_index");
  CHECK_THROWS_AS(load_dataset(missing), DataError);
}
