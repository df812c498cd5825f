#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "panolum/hdr.hpp"
#include "panolum/model_io.hpp"

using namespace panolum;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  std::string cmd = env + (env.empty() ? "" : " ") +
                    std::string(PANOLUM_CLI_PATH) + " " + args +
                    " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult res;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe))
    res.out.append(buf, n);
  int status = pclose(pipe);
  res.exit_code = WEXITSTATUS(status);
  return res;
}

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "panolum_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Four March days around the equinox, enough for a fast end-to-end pass.
fs::path mini_epw() {
  fs::path path = work_dir() / "mini.epw";
  if (fs::exists(path)) return path;
  std::ofstream out(path);
  out << "LOCATION,Seattle,WA,USA,TMY3,727930,47.6,-122.3,-8.0,56.0\n"
         "DESIGN CONDITIONS,0\nTYPICAL/EXTREME PERIODS,0\n"
         "GROUND TEMPERATURES,0\nHOLIDAYS/DAYLIGHT SAVINGS,No,0,0,0\n"
         "COMMENTS 1,\nCOMMENTS 2,\nDATA PERIODS,1,1,Data,Sunday,1/1,12/31\n";
  for (int day = 19; day <= 22; ++day)
    for (int hour = 1; hour <= 24; ++hour)
      out << "2017,3," << day << ',' << hour
          << ",0,?,10,5,70,101325,0,0,0,400," << 250 + 10 * hour << ",90"
          << ",0,0,0,0\n";
  return path;
}

fs::path dataset_dir() {
  fs::path dir = work_dir() / "dataset";
  if (!fs::exists(dir / "index.csv")) {
    auto res = run_cli("gen-data --epw " + mini_epw().string() +
                       " --res 24x12 --out " + dir.string());
    REQUIRE(res.exit_code == 0);
  }
  return dir;
}

fs::path uniform_hdr(double lum, const std::string& name, int w = 460,
                     int h = 230) {
  fs::path path = work_dir() / name;
  if (!fs::exists(path))
    write_hdr_file(to_gray_image(make_map(w, h, lum)), path);
  return path;
}

}  // namespace

TEST_CASE("help exits zero for every subcommand") {
  CHECK(run_cli("--help").exit_code == 0);
  for (const char* sub :
       {"gen-data", "select", "train", "predict", "evaluate", "fisheye",
        "dgp", "rammg", "falsecolor", "stats"})
    CHECK(run_cli(std::string(sub) + " --help").exit_code == 0);
}

TEST_CASE("usage errors exit 1, data errors exit 2") {
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("nonsense-subcommand").exit_code == 1);
  CHECK(run_cli("rammg").exit_code == 1);  // missing required --in
  CHECK(run_cli("rammg --in /nonexistent.hdr").exit_code == 2);
  CHECK(run_cli("falsecolor --in " + uniform_hdr(100, "u100.hdr").string() +
                " --min 10 --max 5 --out " +
                (work_dir() / "x.ppm").string())
            .exit_code == 1);
}

TEST_CASE("rammg of a constant panorama prints 0.0") {
  auto res = run_cli("rammg --in " + uniform_hdr(100, "u100.hdr").string());
  CHECK(res.exit_code == 0);
  CHECK(res.out == "0.0\n");
}

TEST_CASE("dgp sweep over ten yaws on the uniform panorama") {
  auto res = run_cli("dgp --in " + uniform_hdr(100, "u100.hdr").string() +
                     " --yaws 0:360:36");
  REQUIRE(res.exit_code == 0);
  std::istringstream lines(res.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "yaw,dgp");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    double value = std::stod(line.substr(comma + 1));
    CHECK(value == Catch::Approx(0.17844).margin(1e-3));
    ++rows;
  }
  CHECK(rows == 10);
}

TEST_CASE("falsecolor writes a valid ppm") {
  fs::path out = work_dir() / "fc.ppm";
  auto res = run_cli("falsecolor --in " +
                     uniform_hdr(100, "u100.hdr").string() +
                     " --min 1 --max 10000 --out " + out.string());
  REQUIRE(res.exit_code == 0);
  std::ifstream in(out, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), {});
  CHECK(content.rfind("P6\n460 230\n255\n", 0) == 0);
  CHECK(content.size() == 15 + 460 * 230 * 3);
}

TEST_CASE("fisheye writes a square hdr") {
  fs::path out = work_dir() / "fish.hdr";
  auto res = run_cli("fisheye --in " + uniform_hdr(75, "u75.hdr").string() +
                     " --yaw 36 --size 64 --out " + out.string());
  REQUIRE(res.exit_code == 0);
  RadianceImage img = read_hdr_file(out);
  CHECK(img.width == 64);
  CHECK(img.height == 64);
}

TEST_CASE("end-to-end workflow on a miniature dataset") {
  fs::path data = dataset_dir();

  fs::path sched = work_dir() / "sched.json";
  auto sel = run_cli("select --dataset " + data.string() +
                     " --scheme kmeans --k 12 --seed 5 --out " +
                     sched.string());
  REQUIRE(sel.exit_code == 0);

  fs::path cfg = work_dir() / "train.json";
  {
    std::ofstream out(cfg);
    out << R"({"max_epochs": 4, "batch0_images": 4,
               "arch": {"branch_a": [12, 12], "branch_b": [6],
                        "head": [8]}})";
  }
  fs::path model = work_dir() / "mini.model.json";
  auto tr = run_cli("train --dataset " + data.string() + " --schedule " +
                    sched.string() + " --config " + cfg.string() +
                    " --out " + model.string() + " --deterministic");
  REQUIRE(tr.exit_code == 0);
  CHECK(fs::exists(model));
  CHECK(fs::exists(work_dir() / "mini.history.csv"));

  // deterministic retrain writes identical bytes
  fs::path model2 = work_dir() / "mini2.model.json";
  run_cli("train --dataset " + data.string() + " --schedule " +
          sched.string() + " --config " + cfg.string() + " --out " +
          model2.string() + " --deterministic");
  std::ifstream a(model, std::ios::binary), b(model2, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), {});
  std::string sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);

  // predict one timestamp taken from the index
  std::ifstream index(data / "index.csv");
  std::string header, first;
  std::getline(index, header);
  std::getline(index, first);
  std::string stamp = first.substr(0, first.find(','));
  fs::path pred_dir = work_dir() / "pred";
  auto pr = run_cli("predict --model " + model.string() + " --dataset " +
                    data.string() + " --timestamps " + stamp + " --out " +
                    pred_dir.string());
  REQUIRE(pr.exit_code == 0);
  CHECK(fs::exists(pred_dir / (stamp + "_pred.hdr")));

  auto ev = run_cli("evaluate --model " + model.string() + " --dataset " +
                    data.string() + " --n-test 5 --seed 3 --report " +
                    (work_dir() / "report.json").string() + " --scatter " +
                    (work_dir() / "scatter").string());
  REQUIRE(ev.exit_code == 0);
  CHECK(fs::exists(work_dir() / "report.json"));
  CHECK(fs::exists(work_dir() / "scatter_dgp.csv"));
  CHECK(fs::exists(work_dir() / "scatter_rammg.csv"));

  auto st = run_cli("stats --dataset " + data.string() + " --bins 4");
  REQUIRE(st.exit_code == 0);
  std::istringstream lines(st.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "dir_lo,dir_hi,dif_lo,dif_hi,fraction");
  int rows = 0;
  double total = 0.0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    total += std::stod(line.substr(line.rfind(',') + 1));
    ++rows;
  }
  CHECK(rows == 16);
  CHECK(total == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("trained models are bitwise independent of the worker count") {
  fs::path data = dataset_dir();
  fs::path sched = work_dir() / "threads_sched.json";
  REQUIRE(run_cli("select --dataset " + data.string() +
                  " --scheme kmeans --k 10 --seed 2 --out " + sched.string())
              .exit_code == 0);
  fs::path cfg = work_dir() / "threads_train.json";
  {
    std::ofstream out(cfg);
    out << R"({"max_epochs": 3, "arch": {"branch_a": [10],
               "branch_b": [4], "head": [6]}})";
  }
  auto train_with = [&](const std::string& env, const std::string& name) {
    fs::path model = work_dir() / name;
    auto res =
        run_cli("train --dataset " + data.string() + " --schedule " +
                    sched.string() + " --config " + cfg.string() + " --out " +
                    model.string() + " --deterministic",
                env);
    REQUIRE(res.exit_code == 0);
    std::ifstream in(model, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
  };
  std::string one = train_with("PANOLUM_THREADS=1", "t1.model.json");
  std::string four = train_with("PANOLUM_THREADS=4", "t4.model.json");
  CHECK(one == four);
}

TEST_CASE("set3 schedule counts survive the cli surface") {
  // on the 3-day March dataset, set3b keeps only the Mar 19-21 window
  fs::path data = dataset_dir();
  fs::path sched = work_dir() / "set3b.json";
  auto res = run_cli("select --dataset " + data.string() +
                     " --scheme set3b --seed 1 --out " + sched.string());
  REQUIRE(res.exit_code == 0);
  std::ifstream in(sched);
  nlohmann::json j;
  in >> j;
  std::size_t n = j["train"].size() + j["validation"].size();
  CHECK(n == 36);  // 3 equinox days x 12 daylight hours
}
