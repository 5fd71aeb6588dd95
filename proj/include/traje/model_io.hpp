// Versioned JSON model file.
//
//   {"format_version": 1,
//    "config": {"input_dim": 2, "hidden_dim": H, "mixtures": M},
//    "params": {"w_update": [...], ...},   // row-major, 17 significant digits
//    "rng_seed": S,
//    "training_meta": {...}}

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "traje/rnn.hpp"

namespace traje::rnn
{

inline constexpr int kModelFormatVersion = 1;

class ModelLoadError : public std::runtime_error
{
  using std::runtime_error::runtime_error;
};

class ModelVersionError : public ModelLoadError
{
  using ModelLoadError::ModelLoadError;
};

class ModelFormatError : public ModelLoadError
{
  using ModelLoadError::ModelLoadError;
};

class ModelShapeError : public ModelLoadError
{
  using ModelLoadError::ModelLoadError;
};

struct ModelFile
{
  Model model;
  std::uint64_t rng_seed{0};
  nlohmann::json training_meta = nlohmann::json::object();
};

inline std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string serialize_model(const ModelFile& file)
{
  const ModelConfig& cfg = file.model.config;
  std::ostringstream out;
  out << "{\n  \"format_version\": " << kModelFormatVersion << ",\n";
  out << "  \"config\": "
      << nlohmann::json{{"input_dim", cfg.input_dim},
                        {"hidden_dim", cfg.hidden_dim},
                        {"mixtures", cfg.mixtures}}
             .dump()
      << ",\n";
  out << "  \"rng_seed\": " << file.rng_seed << ",\n";
  out << "  \"training_meta\": " << file.training_meta.dump() << ",\n";
  out << "  \"params\": {";
  bool first_tensor = true;
  file.model.params.for_each([&](std::string_view name, const auto& t) {
    out << (first_tensor ? "\n" : ",\n") << "    \"" << name << "\": [";
    first_tensor = false;
    bool first = true;
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) {
        out << (first ? "" : ",") << format_double(t(i, j));
        first = false;
      }
    }
    out << "]";
  });
  out << "\n  }\n}\n";
  return out.str();
}

inline void save_model(const std::string& path, const ModelFile& file)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write model file: " + path);
  }
  out << serialize_model(file);
  if (!out) {
    throw std::runtime_error("failed writing model file: " + path);
  }
}

inline ModelFile parse_model(const std::string& text)
{
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version") || !doc.contains("config") ||
      !doc.contains("params")) {
    throw ModelFormatError("malformed model file: missing format_version, config or params");
  }
  if (!doc["format_version"].is_number_integer() ||
      doc["format_version"].get<int>() != kModelFormatVersion) {
    throw ModelVersionError("unsupported model format_version " + doc["format_version"].dump());
  }

  ModelFile file;
  try {
    const auto& c = doc.at("config");
    file.model.config.input_dim = c.at("input_dim").get<int>();
    file.model.config.hidden_dim = c.at("hidden_dim").get<int>();
    file.model.config.mixtures = c.at("mixtures").get<int>();
    if (doc.contains("rng_seed")) {
      file.rng_seed = doc["rng_seed"].get<std::uint64_t>();
    }
    if (doc.contains("training_meta")) {
      file.training_meta = doc["training_meta"];
    }
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("malformed model config: ") + e.what());
  }
  try {
    file.model.config.validate();
  } catch (const std::invalid_argument& e) {
    throw ModelShapeError(e.what());
  }

  file.model.params = ModelParams::zeros(file.model.config);
  const auto& params = doc["params"];
  if (!params.is_object()) {
    throw ModelFormatError("malformed model file: params is not an object");
  }
  file.model.params.for_each([&](std::string_view name, auto& t) {
    const std::string key(name);
    if (!params.contains(key) || !params[key].is_array()) {
      throw ModelFormatError("malformed model file: missing tensor " + key);
    }
    const auto& arr = params[key];
    if (arr.size() != static_cast<std::size_t>(t.size())) {
      throw ModelShapeError("tensor " + key + " has " + std::to_string(arr.size()) +
                            " entries, expected " + std::to_string(t.size()));
    }
    std::size_t pos = 0;
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) {
        const auto& v = arr[pos++];
        if (!v.is_number()) {
          throw ModelFormatError("malformed model file: non-numeric entry in " + key);
        }
        t(i, j) = v.get<double>();
      }
    }
  });
  return file;
}

inline ModelFile load_model(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ModelFormatError("cannot read model file: " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace traje::rnn
