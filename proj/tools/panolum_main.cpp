// Command-line workflow: generate an oracle dataset, select training
// schedules, train the network, predict panoramas, and evaluate with the
// glare/contrast metrics. Exit codes: 0 success, 1 usage error, 2
// data/format error, 3 numeric failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "panolum/panolum.hpp"

namespace fs = std::filesystem;
using namespace panolum;

namespace {

std::string format_value(double v) {
  std::string s = detail::format_double(v);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

nlohmann::json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": invalid JSON: " + e.what());
  }
  return j;
}

SceneSpec scene_from_json(const nlohmann::json& j) {
  SceneSpec scene;
  for (const auto& [key, value] : j.items()) {
    if (key == "room") {
      for (const auto& [k, v] : value.items()) {
        if (k == "width") scene.room_width = v.get<double>();
        else if (k == "depth") scene.room_depth = v.get<double>();
        else if (k == "height") scene.room_height = v.get<double>();
        else throw FormatError("scene: unknown room key '" + k + "'");
      }
    } else if (key == "window") {
      for (const auto& [k, v] : value.items()) {
        if (k == "center_x") scene.window_center_x = v.get<double>();
        else if (k == "center_z") scene.window_center_z = v.get<double>();
        else if (k == "width") scene.window_width = v.get<double>();
        else if (k == "height") scene.window_height = v.get<double>();
        else throw FormatError("scene: unknown window key '" + k + "'");
      }
    } else if (key == "reflectances") {
      for (const auto& [k, v] : value.items()) {
        if (k == "wall") scene.refl_wall = v.get<double>();
        else if (k == "ceiling") scene.refl_ceiling = v.get<double>();
        else if (k == "floor") scene.refl_floor = v.get<double>();
        else if (k == "ground") scene.refl_ground = v.get<double>();
        else throw FormatError("scene: unknown reflectance key '" + k + "'");
      }
    } else if (key == "camera") {
      for (const auto& [k, v] : value.items()) {
        if (k == "x") scene.camera.x = v.get<double>();
        else if (k == "y") scene.camera.y = v.get<double>();
        else if (k == "z") scene.camera.z = v.get<double>();
        else throw FormatError("scene: unknown camera key '" + k + "'");
      }
    } else {
      throw FormatError("scene: unknown key '" + key + "'");
    }
  }
  validate_scene(scene);
  return scene;
}

std::pair<int, int> parse_resolution(const std::string& res) {
  int w = 0, h = 0;
  char x = 0;
  std::istringstream in(res);
  if (!(in >> w >> x >> h) || (x != 'x' && x != 'X') || w < 2 || h < 2)
    throw CLI::ValidationError("--res", "expected WxH with W,H >= 2");
  return {w, h};
}

std::vector<double> parse_yaws(const std::string& spec) {
  std::vector<double> yaws;
  if (spec.find(':') != std::string::npos) {
    double start = 0, stop = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' ||
        c2 != ':' || step <= 0)
      throw CLI::ValidationError("--yaws", "expected start:stop:step");
    for (double y = start; y < stop; y += step) yaws.push_back(y);
  } else {
    std::istringstream in(spec);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (tok.empty()) continue;
      yaws.push_back(std::stod(tok));
    }
  }
  if (yaws.empty())
    throw CLI::ValidationError("--yaws", "no yaw angles given");
  return yaws;
}

std::vector<DayWindow> parse_day_windows(const std::string& spec) {
  std::vector<DayWindow> windows;
  std::istringstream in(spec);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    DayWindow w;
    if (std::sscanf(tok.c_str(), "%d-%d:%d", &w.month, &w.day, &w.ndays) != 3)
      throw CLI::ValidationError("--days", "expected MM-DD:N[,MM-DD:N...]");
    windows.push_back(w);
  }
  return windows;
}

LuminanceMap load_panorama(const fs::path& path) {
  return luminance_map(read_hdr_file(path));
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw DataError("write failed: " + path.string());
}

fs::path history_path_for(fs::path model_path) {
  std::string name = model_path.filename().string();
  const std::string suffix = ".model.json";
  if (name.size() > suffix.size() &&
      name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
    name = name.substr(0, name.size() - suffix.size());
  return model_path.parent_path() / (name + ".history.csv");
}

int run(int argc, char** argv) {
  CLI::App app{"Annual panoramic luminance prediction toolkit"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand(
      "gen-data", "Render an analytic oracle dataset for an EPW year");
  std::string gen_scene, gen_epw, gen_res = "460x230", gen_out;
  gen->add_option("--scene", gen_scene, "Scene JSON (defaults when omitted)");
  gen->add_option("--epw", gen_epw, "EPW weather file")->required();
  gen->add_option("--res", gen_res, "Panorama resolution WxH");
  gen->add_option("--out", gen_out, "Output dataset directory")->required();
  gen->callback([&] {
    SceneSpec scene;
    if (!gen_scene.empty()) scene = scene_from_json(load_json_file(gen_scene));
    std::ifstream in(gen_epw);
    if (!in) throw DataError("cannot open " + gen_epw);
    EpwData epw = parse_epw(in);
    if (epw.missing_values > 0)
      std::cerr << "warning: " << epw.missing_values
                << " missing irradiance values read as 0\n";
    auto [w, h] = parse_resolution(gen_res);
    Dataset ds = generate_dataset(scene, epw.site, epw.records, w, h, gen_out);
    std::cerr << "wrote " << ds.size() << " samples (" << w << "x" << h
              << ") to " << gen_out << "\n";
  });

  // select
  auto* sel = app.add_subcommand(
      "select", "Build a training schedule over the dataset's states");
  std::string sel_dataset, sel_scheme = "kmeans", sel_days, sel_out;
  int sel_k = 200, sel_month = 3;
  uint64_t sel_seed = 0;
  double sel_window_start = -1.0;
  sel->add_option("--dataset", sel_dataset, "Dataset directory")->required();
  sel->add_option("--scheme", sel_scheme,
                  "kmeans|month|days|set3a|set3b|set3c");
  sel->add_option("--k", sel_k, "Sample count for kmeans");
  sel->add_option("--month", sel_month, "Calendar month for month scheme");
  sel->add_option("--days", sel_days, "Day windows MM-DD:N[,...]");
  sel->add_option("--window-start", sel_window_start,
                  "Clock-window start hour (12 h span) for day schemes");
  sel->add_option("--seed", sel_seed, "Selection seed");
  sel->add_option("--out", sel_out, "Schedule JSON output")->required();
  sel->callback([&] {
    Dataset ds = load_dataset(sel_dataset);
    auto states = ds.states();
    Schedule sched;
    if (sel_scheme == "kmeans") {
      ScheduleParams p;
      p.k = sel_k;
      sched = build_schedule(states, ScheduleKind::kKMeans, p, sel_seed);
    } else if (sel_scheme == "month") {
      ScheduleParams p;
      p.month = sel_month;
      sched = build_schedule(states, ScheduleKind::kMonth, p, sel_seed);
    } else if (sel_scheme == "days") {
      ScheduleParams p;
      p.windows = parse_day_windows(sel_days);
      p.window_start_hour = sel_window_start;
      sched = build_schedule(states, ScheduleKind::kDays, p, sel_seed);
    } else if (sel_scheme == "set3a" || sel_scheme == "set3b" ||
               sel_scheme == "set3c") {
      sched = build_set3_schedule(states, sel_scheme.back(), sel_seed);
    } else {
      throw CLI::ValidationError("--scheme", "unknown scheme " + sel_scheme);
    }
    write_text_file(sel_out, schedule_to_json(sched).dump(2) + "\n");
    std::cerr << "schedule: " << sched.train.size() << " train + "
              << sched.validation.size() << " validation\n";
  });

  // train
  auto* tr = app.add_subcommand("train", "Train the two-branch dense network");
  std::string tr_dataset, tr_schedule, tr_config, tr_out;
  bool tr_deterministic = false;
  tr->add_option("--dataset", tr_dataset, "Dataset directory")->required();
  tr->add_option("--schedule", tr_schedule, "Schedule JSON")->required();
  tr->add_option("--config", tr_config, "Train config JSON");
  tr->add_option("--out", tr_out, "Model output (.model.json)")->required();
  tr->add_flag("--deterministic", tr_deterministic,
               "Fixed reduction order (always on; flag kept for scripts)");
  tr->callback([&] {
    Dataset ds = load_dataset(tr_dataset);
    Schedule sched = schedule_from_json(load_json_file(tr_schedule));
    TrainConfig cfg;
    if (!tr_config.empty())
      cfg = train_config_from_json(load_json_file(tr_config));
    cfg.deterministic = cfg.deterministic || tr_deterministic;
    TrainResult result = train(ds, sched, cfg);
    save_model_file(result.model, tr_out);
    std::ostringstream hist;
    write_history_csv(result.history, hist);
    write_text_file(history_path_for(tr_out), hist.str());
    std::cerr << "trained " << result.history.size() << " epochs, best val "
              << format_value(result.model.meta.best_val_loss) << "\n";
  });

  // predict
  auto* pr = app.add_subcommand("predict", "Predict interior panoramas");
  std::string pr_model, pr_dataset, pr_timestamps, pr_out;
  bool pr_all = false;
  pr->add_option("--model", pr_model, "Model JSON")->required();
  pr->add_option("--dataset", pr_dataset, "Dataset directory")->required();
  pr->add_option("--timestamps", pr_timestamps,
                 "Comma-separated YYYYMMDD_HHMM list");
  pr->add_flag("--all", pr_all, "Predict every dataset state");
  pr->add_option("--out", pr_out, "Output directory")->required();
  pr->callback([&] {
    Model model = load_model_file(pr_model);
    Dataset ds = load_dataset(pr_dataset);
    if (ds.width != model.avg.width || ds.height != model.avg.height)
      throw DataError("predict: dataset resolution does not match model");
    std::vector<std::size_t> which;
    if (pr_all) {
      for (std::size_t i = 0; i < ds.size(); ++i) which.push_back(i);
    } else {
      if (pr_timestamps.empty())
        throw CLI::ValidationError("--timestamps",
                                   "give --timestamps or --all");
      std::istringstream in(pr_timestamps);
      std::string tok;
      while (std::getline(in, tok, ',')) {
        Timestamp ts = parse_timestamp_string(tok);
        bool found = false;
        for (std::size_t i = 0; i < ds.size(); ++i)
          if (ds.entries[i].state.time == ts) {
            which.push_back(i);
            found = true;
            break;
          }
        if (!found) throw DataError("predict: no dataset state at " + tok);
      }
    }
    fs::create_directories(pr_out);
    Predictor predictor(model);
    for (std::size_t i : which) {
      SampleTriple sample = load_sample(ds, i);
      LuminanceMap pred =
          predictor.predict(sample.state, sample.sky, sample.sun);
      std::string name = timestamp_string(sample.state.time) + "_pred.hdr";
      write_hdr_file(to_gray_image(pred), fs::path(pr_out) / name);
    }
    std::cerr << "predicted " << which.size() << " panoramas\n";
  });

  // evaluate
  auto* ev = app.add_subcommand(
      "evaluate", "Evaluate a model on a seeded held-out test draw");
  std::string ev_model, ev_dataset, ev_report, ev_scatter;
  int ev_ntest = 500;
  uint64_t ev_seed = 0;
  ev->add_option("--model", ev_model, "Model JSON")->required();
  ev->add_option("--dataset", ev_dataset, "Dataset directory")->required();
  ev->add_option("--n-test", ev_ntest, "Held-out sample count");
  ev->add_option("--seed", ev_seed, "Test draw seed");
  ev->add_option("--report", ev_report, "Aggregate report JSON")->required();
  ev->add_option("--scatter", ev_scatter, "Scatter CSV prefix");
  ev->callback([&] {
    Model model = load_model_file(ev_model);
    Dataset ds = load_dataset(ev_dataset);
    auto states = ds.states();
    // Exclude the model's recorded train/validation indices from the draw.
    Schedule reserved;
    reserved.kind = ScheduleKind::kExplicit;
    reserved.train = model.meta.train_indices;
    reserved.validation = model.meta.validation_indices;
    std::vector<int> test = split_test(states, reserved, ev_ntest, ev_seed);
    EvalReport report = evaluation_report(model, ds, test);
    write_text_file(ev_report, report_to_json(report).dump(2) + "\n");
    if (!ev_scatter.empty()) {
      std::ostringstream dgp_csv, rammg_csv;
      write_dgp_scatter_csv(report, dgp_csv);
      write_rammg_scatter_csv(report, rammg_csv);
      write_text_file(ev_scatter + "_dgp.csv", dgp_csv.str());
      write_text_file(ev_scatter + "_rammg.csv", rammg_csv.str());
    }
    std::cerr << "log10 mse " << format_value(report.mean_log10_mse)
              << ", dgp r2 " << format_value(report.dgp_r2) << ", rammg r2 "
              << format_value(report.rammg_r2) << "\n";
  });

  // fisheye
  auto* fe = app.add_subcommand("fisheye",
                                "Extract an equidistant fisheye view");
  std::string fe_in, fe_out;
  double fe_yaw = 0.0;
  int fe_size = 512;
  fe->add_option("--in", fe_in, "Panorama HDR")->required();
  fe->add_option("--yaw", fe_yaw, "View yaw, degrees");
  fe->add_option("--size", fe_size, "Output size in pixels");
  fe->add_option("--out", fe_out, "Output HDR")->required();
  fe->callback([&] {
    FisheyeImage fish = panorama_to_fisheye(load_panorama(fe_in), fe_yaw,
                                            fe_size);
    LuminanceMap map;
    map.width = fish.size;
    map.height = fish.size;
    map.values = fish.values;
    write_hdr_file(to_gray_image(map), fe_out);
  });

  // dgp
  auto* dg = app.add_subcommand("dgp", "Daylight glare probability per yaw");
  std::string dg_in, dg_yaws = "0:360:36", dg_out;
  dg->add_option("--in", dg_in, "Panorama HDR")->required();
  dg->add_option("--yaws", dg_yaws, "start:stop:step or comma list");
  dg->add_option("--out", dg_out, "CSV output (stdout when omitted)");
  dg->callback([&] {
    LuminanceMap pan = load_panorama(dg_in);
    std::ostringstream csv;
    csv << "yaw,dgp\n";
    for (double yaw : parse_yaws(dg_yaws))
      csv << format_value(yaw) << ',' << format_value(dgp(pan, yaw)) << '\n';
    if (dg_out.empty())
      std::cout << csv.str();
    else
      write_text_file(dg_out, csv.str());
  });

  // rammg
  auto* rm = app.add_subcommand("rammg", "Multiscale contrast of a panorama");
  std::string rm_in;
  int rm_levels = 5;
  rm->add_option("--in", rm_in, "Panorama HDR")->required();
  rm->add_option("--levels", rm_levels, "Pyramid levels");
  rm->callback([&] {
    std::cout << format_value(rammg(load_panorama(rm_in), rm_levels)) << "\n";
  });

  // falsecolor
  auto* fc = app.add_subcommand("falsecolor",
                                "Logarithmic false-color PPM rendering");
  std::string fc_in, fc_out;
  double fc_min = 1.0, fc_max = 10000.0;
  fc->add_option("--in", fc_in, "Panorama HDR")->required();
  fc->add_option("--min", fc_min, "Scale floor, cd/m2");
  fc->add_option("--max", fc_max, "Scale ceiling, cd/m2");
  fc->add_option("--out", fc_out, "PPM output")->required();
  fc->callback([&] {
    auto ppm = falsecolor(load_panorama(fc_in), fc_min, fc_max);
    std::ofstream out(fc_out, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + fc_out + " for writing");
    out.write(reinterpret_cast<const char*>(ppm.data()),
              static_cast<std::streamsize>(ppm.size()));
    if (!out) throw DataError("write failed: " + fc_out);
  });

  // stats
  auto* st = app.add_subcommand(
      "stats", "Joint (dir, dif) distribution of the dataset's states");
  std::string st_dataset, st_out;
  int st_bins = 4;
  st->add_option("--dataset", st_dataset, "Dataset directory")->required();
  st->add_option("--bins", st_bins, "Bins per axis");
  st->add_option("--out", st_out, "CSV output (stdout when omitted)");
  st->callback([&] {
    Dataset ds = load_dataset(st_dataset);
    auto fractions = joint_distribution(ds.states(), st_bins);
    std::ostringstream csv;
    csv << "dir_lo,dir_hi,dif_lo,dif_hi,fraction\n";
    for (int i = 0; i < st_bins; ++i)
      for (int j = 0; j < st_bins; ++j)
        csv << format_value(1400.0 * i / st_bins) << ','
            << format_value(1400.0 * (i + 1) / st_bins) << ','
            << format_value(700.0 * j / st_bins) << ','
            << format_value(700.0 * (j + 1) / st_bins) << ','
            << format_value(fractions[i * st_bins + j]) << '\n';
    if (st_out.empty())
      std::cout << csv.str();
    else
      write_text_file(st_out, csv.str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // --help exits 0, usage errors exit 1
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
