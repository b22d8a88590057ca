#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "sfp/data_pipeline.hpp"
#include "sfp/errors.hpp"
#include "sfp/model.hpp"

namespace sfp {

inline constexpr const char* kModelVersion = "sfp-model/1";

/// Everything needed to score raw CSV rows: parameters, hyperparameters and
/// the preprocessing statistics of the training data.
struct ModelFile {
  ModelParams params;
  Hyperparams hyper;
  std::optional<PreprocessStats> stats;
};

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) { return m.to_rows(); }

inline Matrix matrix_from_json(const nlohmann::json& j, std::size_t rows, std::size_t cols, const char* what) {
  auto nested = j.get<std::vector<std::vector<double>>>();
  if (nested.size() != rows) throw IoError(std::string("model file: '") + what + "' has wrong row count");
  for (const auto& r : nested)
    if (r.size() != cols) throw IoError(std::string("model file: '") + what + "' has wrong column count");
  return rows ? Matrix::from_rows(nested) : Matrix(0, cols);
}

inline nlohmann::json stats_to_json(const PreprocessStats& s) {
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& in : s.inputs)
    inputs.push_back({{"name", in.name},
                      {"type", in.type == ColumnType::numeric ? "numeric" : "categorical"},
                      {"median", in.median},
                      {"mode", in.mode},
                      {"levels", in.levels}});
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& o : s.outputs)
    outputs.push_back({{"name", o.name}, {"source", o.source}, {"level", o.level}, {"mean", o.mean}, {"sd", o.sd}});
  return {{"inputs", inputs},
          {"outputs", outputs},
          {"dropped", s.dropped},
          {"target", to_string(s.target)},
          {"label_levels", s.label_levels}};
}

inline PreprocessStats stats_from_json(const nlohmann::json& j) {
  PreprocessStats s;
  for (const auto& in : j.at("inputs")) {
    PreprocessStats::Input x;
    x.name = in.at("name").get<std::string>();
    x.type = in.at("type").get<std::string>() == "numeric" ? ColumnType::numeric : ColumnType::categorical;
    x.median = in.at("median").get<double>();
    x.mode = in.at("mode").get<std::string>();
    x.levels = in.at("levels").get<std::vector<std::string>>();
    s.inputs.push_back(std::move(x));
  }
  for (const auto& o : j.at("outputs")) {
    PreprocessStats::Output x;
    x.name = o.at("name").get<std::string>();
    x.source = o.at("source").get<std::size_t>();
    x.level = o.at("level").get<int>();
    x.mean = o.at("mean").get<double>();
    x.sd = o.at("sd").get<double>();
    if (x.source >= s.inputs.size()) throw IoError("model file: preprocessing output refers to unknown input");
    s.outputs.push_back(std::move(x));
  }
  s.dropped = j.at("dropped").get<std::vector<std::string>>();
  s.target = loss_kind_from_string(j.at("target").get<std::string>());
  s.label_levels = j.at("label_levels").get<std::vector<std::string>>();
  return s;
}

}  // namespace detail

inline nlohmann::json to_json(const ModelFile& m) {
  const auto& p = m.params;
  nlohmann::json j;
  j["version"] = kModelVersion;
  j["loss_kind"] = to_string(p.loss.kind);
  j["k"] = p.clusters();
  j["p"] = p.dims();
  j["M"] = p.loss.kind == LossKind::logloss ? p.loss.classes : 0;
  j["centers"] = detail::matrix_to_json(p.centers);
  j["weights"] = detail::matrix_to_json(p.weights);
  j["prototypes"] = p.prototypes;
  j["hyperparams"] = {{"k", m.hyper.k}, {"alpha", m.hyper.alpha}, {"gamma", m.hyper.gamma}, {"lambda", m.hyper.lambda}};
  j["preprocess_stats"] = m.stats ? detail::stats_to_json(*m.stats) : nlohmann::json(nullptr);
  return j;
}

inline ModelFile model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<std::string>() != kModelVersion)
      throw IoError("model file: unsupported version '" + j.at("version").get<std::string>() + "'");
    ModelFile m;
    const auto k = j.at("k").get<std::size_t>();
    const auto p = j.at("p").get<std::size_t>();
    m.params.loss.kind = loss_kind_from_string(j.at("loss_kind").get<std::string>());
    m.params.loss.classes = j.at("M").get<int>();
    m.params.centers = detail::matrix_from_json(j.at("centers"), k, p, "centers");
    m.params.weights = detail::matrix_from_json(j.at("weights"), k, p, "weights");
    m.params.prototypes = j.at("prototypes").get<std::vector<Prototype>>();
    const auto& h = j.at("hyperparams");
    m.hyper = {h.at("k").get<int>(), h.at("alpha").get<double>(), h.at("gamma").get<double>(),
               h.at("lambda").get<double>()};
    if (!j.at("preprocess_stats").is_null()) m.stats = detail::stats_from_json(j.at("preprocess_stats"));
    m.params.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("model file: ") + e.what());
  } catch (const DomainError& e) {
    throw IoError(std::string("model file: ") + e.what());
  }
}

inline void save_model(const std::string& path, const ModelFile& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << to_json(m).dump(2) << "\n";
  if (!out) throw IoError("error writing '" + path + "'");
}

inline ModelFile load_model(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace sfp
