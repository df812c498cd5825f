#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "panolum/common.hpp"
#include "panolum/network.hpp"

namespace panolum {

inline constexpr int kModelFormatVersion = 1;

// Model files are JSON with doubles serialized as shortest round-trippable
// decimals, so a load(save(m)) reproduces predictions bitwise.
inline nlohmann::json save_model(const Model& model) {
  for (const auto& layer : model.layers) {
    for (double w : layer.w)
      if (!std::isfinite(w)) throw DataError("save_model: non-finite weight");
    for (double b : layer.b)
      if (!std::isfinite(b)) throw DataError("save_model: non-finite bias");
  }
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["architecture"] = {{"branch_a", model.arch.branch_a},
                       {"branch_b", model.arch.branch_b},
                       {"head", model.arch.head},
                       {"linear_output", model.arch.linear_output}};
  j["encoding"] = {{"floor", model.enc.floor},
                   {"ceiling", model.enc.ceiling},
                   {"gamma", model.enc.gamma}};
  j["domain_bounds"] = {{"altitude_max", model.bounds.altitude_max},
                        {"dni_max", model.bounds.dni_max},
                        {"dhi_max", model.bounds.dhi_max}};
  j["avg_map"] = {{"width", model.avg.width},
                  {"height", model.avg.height},
                  {"values", model.avg.values}};
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : model.layers)
    layers.push_back({{"rows", layer.out},
                      {"cols", layer.in},
                      {"weights", layer.w},
                      {"bias", layer.b}});
  j["layers"] = layers;
  j["metadata"] = {{"seed", model.meta.seed},
                   {"epochs_run", model.meta.epochs_run},
                   {"best_val_loss", model.meta.best_val_loss},
                   {"train_indices", model.meta.train_indices},
                   {"validation_indices", model.meta.validation_indices}};
  return j;
}

inline Model load_model(const nlohmann::json& j) {
  if (!j.contains("format_version") ||
      j["format_version"].get<int>() != kModelFormatVersion)
    throw FormatError("model: missing or unsupported format_version");
  Model model;
  try {
    const auto& arch = j.at("architecture");
    model.arch.branch_a = arch.at("branch_a").get<std::vector<int>>();
    model.arch.branch_b = arch.at("branch_b").get<std::vector<int>>();
    model.arch.head = arch.at("head").get<std::vector<int>>();
    model.arch.linear_output = arch.value("linear_output", false);
    validate_architecture(model.arch);

    const auto& enc = j.at("encoding");
    model.enc.floor = enc.at("floor").get<double>();
    model.enc.ceiling = enc.at("ceiling").get<double>();
    model.enc.gamma = enc.at("gamma").get<double>();
    if (!(model.enc.floor > 0) || !(model.enc.ceiling > model.enc.floor) ||
        !(model.enc.gamma > 0))
      throw FormatError("model: invalid encoding constants");

    const auto& bounds = j.at("domain_bounds");
    model.bounds.altitude_max = bounds.at("altitude_max").get<double>();
    model.bounds.dni_max = bounds.at("dni_max").get<double>();
    model.bounds.dhi_max = bounds.at("dhi_max").get<double>();

    const auto& avg = j.at("avg_map");
    model.avg.width = avg.at("width").get<int>();
    model.avg.height = avg.at("height").get<int>();
    model.avg.values = avg.at("values").get<std::vector<double>>();
    if (model.avg.values.size() !=
        static_cast<std::size_t>(model.avg.width) * model.avg.height)
      throw FormatError("model: avg_map size mismatch");

    auto shapes = layer_shapes(model.arch);
    const auto& layers = j.at("layers");
    if (layers.size() != shapes.size())
      throw FormatError("model: layer count does not match architecture");
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      Layer layer;
      layer.out = layers[i].at("rows").get<int>();
      layer.in = layers[i].at("cols").get<int>();
      layer.w = layers[i].at("weights").get<std::vector<double>>();
      layer.b = layers[i].at("bias").get<std::vector<double>>();
      if (layer.in != shapes[i].first || layer.out != shapes[i].second ||
          layer.w.size() != static_cast<std::size_t>(layer.in) * layer.out ||
          layer.b.size() != static_cast<std::size_t>(layer.out))
        throw FormatError("model: layer " + std::to_string(i) +
                          " shape inconsistent");
      for (double w : layer.w)
        if (!std::isfinite(w))
          throw FormatError("model: non-finite weight in layer " +
                            std::to_string(i));
      model.layers.push_back(std::move(layer));
    }

    if (j.contains("metadata")) {
      const auto& meta = j["metadata"];
      model.meta.seed = meta.value("seed", uint64_t{0});
      model.meta.epochs_run = meta.value("epochs_run", 0);
      model.meta.best_val_loss =
          meta.value("best_val_loss", std::numeric_limits<double>::infinity());
      if (meta.contains("train_indices"))
        model.meta.train_indices =
            meta["train_indices"].get<std::vector<int>>();
      if (meta.contains("validation_indices"))
        model.meta.validation_indices =
            meta["validation_indices"].get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model: malformed document: ") + e.what());
  }
  return model;
}

inline void save_model_file(const Model& model,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << save_model(model).dump();
  out << '\n';
  if (!out) throw DataError("model write failed: " + path.string());
}

inline Model load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model: invalid JSON: ") + e.what());
  }
  return load_model(j);
}

}  // namespace panolum
