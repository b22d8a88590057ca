#pragma once

// Command-line front end. Kept in a header so tests can drive run() in-process.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfp/sfp.hpp"

namespace sfp::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3, kNumericError = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

struct HyperFlags {
  std::optional<int> k;
  std::optional<double> alpha, gamma, lambda;
  std::optional<double> alpha_prime, gamma_prime, lambda_prime;

  void add(CLI::App* app, bool with_k = true) {
    if (with_k) app->add_option("--k", k, "number of clusters");
    app->add_option("--alpha", alpha, "label-term weight (>= 0)");
    app->add_option("--gamma", gamma, "membership entropy weight (> 0)");
    app->add_option("--lambda", lambda, "feature-weight entropy weight (> 0)");
    app->add_option("--alpha-prime", alpha_prime, "alpha in (0,1] form, alpha = (1 - a') / a'");
    app->add_option("--gamma-prime", gamma_prime, "gamma in (0,1) form");
    app->add_option("--lambda-prime", lambda_prime, "lambda in (0,1) form");
  }

  static double pick(const char* name, const std::optional<double>& raw, const std::optional<double>& primed,
                     bool closed_at_one, std::ostream& err) {
    if (primed) {
      if (raw) err << "warning: both --" << name << " and --" << name << "-prime given; using --" << name << "-prime\n";
      const double t = *primed;
      if (!(t > 0.0 && (closed_at_one ? t <= 1.0 : t < 1.0)))
        throw UsageError(std::string("--") + name + "-prime must lie in (0, 1" + (closed_at_one ? "]" : ")"));
      return from_prime(t);
    }
    if (!raw) throw UsageError(std::string("missing --") + name + " (or --" + name + "-prime)");
    return *raw;
  }

  Hyperparams resolve(std::ostream& err) const {
    if (!k) throw UsageError("missing --k");
    Hyperparams h{*k, pick("alpha", alpha, alpha_prime, true, err), pick("gamma", gamma, gamma_prime, false, err),
                  pick("lambda", lambda, lambda_prime, false, err)};
    try {
      h.validate();
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    return h;
  }
};

struct FitFlags {
  int max_iters = 100;
  double center_tol = 1e-6;
  int restarts = 1;

  void add(CLI::App* app) {
    app->add_option("--max-iters", max_iters, "iteration cap per fit")->capture_default_str();
    app->add_option("--center-tol", center_tol, "stop when no center moves more than this")->capture_default_str();
    app->add_option("--restarts", restarts, "random starts per fit; the lowest objective wins")->capture_default_str();
  }

  FitConfig config(std::uint64_t seed) const {
    FitConfig c;
    c.max_iters = max_iters;
    c.center_tol = center_tol;
    c.restarts = restarts;
    c.seed = seed;
    try {
      c.validate();
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

/// Writes to `path`, or to `fallback` when the path is empty or "-".
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  auto out = open_out(path);
  fn(out);
  if (!out) throw IoError("error writing '" + path + "'");
}

inline nlohmann::json summary_json(const Summary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

inline nlohmann::json report_json(const MetricReport& r) {
  nlohmann::json j;
  j["accuracy"] = summary_json(r.accuracy);
  if (r.sensitivity) j["sensitivity"] = summary_json(*r.sensitivity);
  if (r.specificity) j["specificity"] = summary_json(*r.specificity);
  if (r.auc) j["auc"] = summary_json(*r.auc);
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    nlohmann::json fj{{"accuracy", f.accuracy}};
    if (f.sensitivity) fj["sensitivity"] = *f.sensitivity;
    if (f.specificity) fj["specificity"] = *f.specificity;
    if (f.auc) fj["auc"] = *f.auc;
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  return j;
}

inline nlohmann::json hyper_json(const Hyperparams& h) {
  return {{"k", h.k}, {"alpha", h.alpha}, {"gamma", h.gamma}, {"lambda", h.lambda}};
}

/// The model's input columns, picked out of `table` by name (extra columns are ignored).
inline RawTable select_inputs(const RawTable& table, const PreprocessStats& stats) {
  RawTable out;
  for (const auto& in : stats.inputs) {
    auto it = std::find_if(table.features.begin(), table.features.end(),
                           [&](const RawColumn& c) { return c.name == in.name; });
    if (it == table.features.end()) throw SchemaError("input column '" + in.name + "' not found");
    out.features.push_back(*it);
  }
  return out;
}

inline std::vector<std::string> feature_names(const ModelFile& m) {
  if (m.stats) return m.stats->feature_names();
  std::vector<std::string> names;
  for (std::size_t l = 0; l < m.params.dims(); ++l) names.push_back("x" + std::to_string(l + 1));
  return names;
}

/// Replaces `--config FILE` with the flags it holds. The file is a flat JSON
/// object such as {"k": 4, "gamma": 0.05}; a key already on the command line wins.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  auto text = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string flag = "--" + it.key();
    if (given(flag)) continue;
    const auto& v = it.value();
    if (v.is_boolean()) {
      if (v.get<bool>()) args.push_back(flag);
    } else if (v.is_array()) {
      args.push_back(flag);
      for (const auto& e : v) args.push_back(text(e));
    } else if (v.is_string() || v.is_number()) {
      args.push_back(flag);
      args.push_back(text(v));
    } else {
      throw UsageError("config entry '" + it.key() + "' has an unsupported type");
    }
  }
  return args;
}

}  // namespace detail

/// Runs one subcommand. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Supervised fuzzy partitioning: train, evaluate and inspect models", "sfp"};
  app.require_subcommand(1, 1);

  int threads = 1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", "JSON file with flag values; command-line flags win");
    sub->add_option("--threads", threads, "worker threads (default: $SFP_THREADS or 1)")
        ->envname("SFP_THREADS");
  };

  std::string data_path, label = "y", loss_name = "logloss", model_path, out_path, report_path, trace_path;
  std::uint64_t seed = 0;
  detail::HyperFlags hyper_flags;
  detail::FitFlags fit_flags;

  // gen
  auto* gen = app.add_subcommand("gen", "write a synthetic dataset as CSV");
  std::string kind_name;
  std::size_t gen_n = 0;
  gen->add_option("--kind", kind_name, "spiral | two_circle | xor | mixture3")->required();
  gen->add_option("--n", gen_n, "number of points")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed)->required();
  gen->add_option("--out", out_path, "output CSV (default stdout)");
  add_common(gen);

  // train
  auto* train = app.add_subcommand("train", "fit a model and save it as JSON");
  train->add_option("--data", data_path, "training CSV")->required();
  train->add_option("--label", label, "label column")->capture_default_str();
  train->add_option("--loss", loss_name, "logloss | logistic | squared_error")->capture_default_str();
  train->add_option("--seed", seed)->required();
  train->add_option("--model", model_path, "output model JSON")->required();
  train->add_option("--trace", trace_path, "CSV of the objective after each iteration");
  hyper_flags.add(train);
  fit_flags.add(train);
  add_common(train);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "score a CSV with a saved model");
  predict_cmd->add_option("--model", model_path)->required();
  predict_cmd->add_option("--data", data_path, "CSV with the model's input columns")->required();
  predict_cmd->add_option("--out", out_path, "output CSV (default stdout)");
  add_common(predict_cmd);

  // cv
  auto* cv = app.add_subcommand("cv", "repeated stratified k-fold cross-validation");
  int folds = 5, repeats = 1;
  cv->add_option("--data", data_path)->required();
  cv->add_option("--label", label)->capture_default_str();
  cv->add_option("--loss", loss_name)->capture_default_str();
  cv->add_option("--folds", folds)->capture_default_str()->check(CLI::Range(2, 1000));
  cv->add_option("--repeats", repeats)->capture_default_str()->check(CLI::PositiveNumber);
  cv->add_option("--seed", seed)->required();
  cv->add_option("--out", out_path, "JSON report (default stdout)");
  hyper_flags.add(cv);
  fit_flags.add(cv);
  add_common(cv);

  // tune
  auto* tune = app.add_subcommand("tune", "grid search over (k, alpha', gamma', lambda')");
  int strategy = 3, inner_folds = 5;
  double top_percent = 20.0;
  bool full_grid = false, nested = false;
  tune->add_option("--data", data_path)->required();
  tune->add_option("--label", label)->capture_default_str();
  tune->add_option("--loss", loss_name)->capture_default_str();
  tune->add_option("--folds", folds)->capture_default_str()->check(CLI::Range(2, 1000));
  tune->add_option("--repeats", repeats, "CV repeats (outer repeats with --nested)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  tune->add_option("--inner-folds", inner_folds, "inner folds with --nested")->capture_default_str();
  tune->add_option("--strategy", strategy, "1 best, 2 top-q% mean, 3 LOESS-smoothed")
      ->capture_default_str()
      ->check(CLI::Range(1, 3));
  tune->add_option("--top-percent", top_percent, "q for strategy 2")->capture_default_str();
  tune->add_flag("--full-grid", full_grid, "search the 5000-point grid instead of the reduced one");
  tune->add_flag("--nested", nested, "estimate accuracy with nested cross-validation");
  tune->add_option("--seed", seed)->required();
  tune->add_option("--report", report_path, "CSV with one row per grid point");
  tune->add_option("--out", out_path, "JSON result (default stdout)");
  fit_flags.add(tune);
  add_common(tune);

  // select-features
  auto* select = app.add_subcommand("select-features", "features carrying most of each cluster's weight");
  double threshold = 0.9;
  select->add_option("--model", model_path)->required();
  select->add_option("--threshold", threshold)->capture_default_str();
  select->add_option("--out", out_path, "JSON (default stdout)");
  add_common(select);

  // gme-check
  auto* gme = app.add_subcommand("gme-check", "compare EM and block coordinate descent on a random mixture");
  std::size_t gme_n = 30, gme_k = 2, gme_p = 2, gme_m = 2;
  int gme_iters = 10;
  double gme_gamma = 1.0, gme_lambda = 1.0;
  gme->add_option("--n", gme_n)->capture_default_str();
  gme->add_option("--k", gme_k)->capture_default_str();
  gme->add_option("--p", gme_p)->capture_default_str();
  gme->add_option("--classes", gme_m)->capture_default_str();
  gme->add_option("--iters", gme_iters)->capture_default_str()->check(CLI::NonNegativeNumber);
  gme->add_option("--gamma", gme_gamma)->capture_default_str()->check(CLI::PositiveNumber);
  gme->add_option("--lambda", gme_lambda)->capture_default_str()->check(CLI::PositiveNumber);
  gme->add_option("--seed", seed)->required();
  gme->add_option("--out", out_path, "JSON (default stdout)");
  add_common(gme);

  // decision-grid
  auto* grid_cmd = app.add_subcommand("decision-grid", "predicted labels on a regular grid over two inputs");
  int resolution = 200;
  std::vector<double> x1_range, x2_range;
  grid_cmd->add_option("--model", model_path)->required();
  grid_cmd->add_option("--data", data_path, "CSV whose range sets the grid bounds");
  grid_cmd->add_option("--resolution", resolution, "points per axis")->capture_default_str()->check(
      CLI::Range(2, 100000));
  grid_cmd->add_option("--x1-range", x1_range, "lo hi")->expected(2);
  grid_cmd->add_option("--x2-range", x2_range, "lo hi")->expected(2);
  grid_cmd->add_option("--out", out_path, "output CSV (default stdout)");
  add_common(grid_cmd);

  try {
    args = detail::expand_config(std::move(args));
  } catch (const std::exception& e) {
    err << "sfp: usage error: " << e.what() << "\n";
    return kUsage;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (threads < 1) throw UsageError("--threads must be at least 1");
    auto loss_kind = [&] {
      try {
        return loss_kind_from_string(loss_name);
      } catch (const DomainError& e) {
        throw UsageError(e.what());
      }
    };

    if (gen->parsed()) {
      SyntheticKind kind;
      try {
        kind = synthetic_kind_from_string(kind_name);
      } catch (const DomainError& e) {
        throw UsageError(e.what());
      }
      const Dataset ds = gen_synthetic(kind, gen_n, seed);
      detail::emit(out_path, out, [&](std::ostream& o) { write_csv(o, ds, LossKind::logloss, "y"); });
      return kOk;
    }

    if (train->parsed()) {
      const Hyperparams hyper = hyper_flags.resolve(err);
      const LossKind kind = loss_kind();
      const FitConfig config = [&] {
        FitConfig c = fit_flags.config(seed);
        c.record_trace = !trace_path.empty();
        return c;
      }();
      const RawTable table = load_csv(data_path, label);
      auto [data, stats] = preprocess(table, kind);
      for (const auto& w : stats.warnings) err << "warning: " << w << "\n";
      const FitResult fitted = fit(data, hyper, Loss{kind, data.classes}, config);
      save_model(model_path, ModelFile{fitted.params, hyper, stats});
      if (!trace_path.empty())
        detail::emit(trace_path, out, [&](std::ostream& o) {
          o << "iteration,objective\n";
          for (std::size_t t = 0; t < fitted.objective_trace.size(); ++t)
            o << t + 1 << "," << format_double(fitted.objective_trace[t]) << "\n";
        });
      out << "iterations=" << fitted.iterations << " converged=" << (fitted.converged ? "true" : "false") << "\n";
      return kOk;
    }

    if (predict_cmd->parsed()) {
      const ModelFile model = load_model(model_path);
      Dataset data;
      if (model.stats) {
        data = apply_preprocess(detail::select_inputs(load_csv(data_path, ""), *model.stats), *model.stats);
      } else {
        data = to_dataset(load_csv(data_path, ""), model.params.loss.kind);
      }
      if (data.dims() != model.params.dims())
        throw SchemaError("data has " + std::to_string(data.dims()) + " features, model expects " +
                          std::to_string(model.params.dims()));
      const auto preds = predict_all(data.features, model.params, model.hyper);
      const auto kind = model.params.loss.kind;
      const std::size_t classes = kind == LossKind::squared_error ? 0 : (kind == LossKind::logistic ? 2 : model.params.loss.classes);
      auto label_text = [&](double y) {
        return model.stats ? model.stats->label_text(y) : label_to_text(y, kind);
      };
      detail::emit(out_path, out, [&](std::ostream& o) {
        o << "id,predicted_label";
        for (std::size_t m = 1; m <= classes; ++m) o << ",score_class_" << m;
        if (kind == LossKind::squared_error) o << ",score";
        for (std::size_t j = 1; j <= model.params.clusters(); ++j) o << ",membership_" << j;
        o << "\n";
        for (std::size_t i = 0; i < preds.size(); ++i) {
          const auto& p = preds[i];
          o << i + 1 << "," << csv_escape(label_text(p.label));
          for (double s : p.class_scores) o << "," << format_double(s);
          if (kind == LossKind::squared_error) o << "," << format_double(p.score);
          for (double u : p.memberships) o << "," << format_double(u);
          o << "\n";
        }
      });
      return kOk;
    }

    if (cv->parsed()) {
      const Hyperparams hyper = hyper_flags.resolve(err);
      const LossKind kind = loss_kind();
      const FitConfig config = fit_flags.config(seed);
      const RawTable table = load_csv(data_path, label);
      const MetricReport report = kfold_cv(table, hyper, kind, folds, repeats, seed, config, threads);
      nlohmann::json j = detail::report_json(report);
      j["hyperparams"] = detail::hyper_json(hyper);
      j["folds_per_repeat"] = folds;
      j["repeats"] = repeats;
      detail::emit(out_path, out, [&](std::ostream& o) { o << j.dump(2) << "\n"; });
      return kOk;
    }

    if (tune->parsed()) {
      const LossKind kind = loss_kind();
      const FitConfig config = fit_flags.config(seed);
      const auto strat = static_cast<SelectionStrategy>(strategy);
      const RawTable table = load_csv(data_path, label);
      nlohmann::json j;
      if (nested) {
        const auto result = nested_cv(table, kind, folds, repeats, inner_folds, seed, strat, full_grid, config, threads);
        j = detail::report_json(result.report);
        nlohmann::json chosen = nlohmann::json::array();
        for (const auto& h : result.chosen) chosen.push_back(detail::hyper_json(h));
        j["chosen"] = std::move(chosen);
      } else {
        const auto splits = make_splits(table, kind, folds, repeats, seed);
        const int classes = kind == LossKind::logloss ? splits.front().train.classes : 2;
        const auto grid = default_grid(splits.front().train.size(), std::max(2, classes), full_grid);
        const auto result = grid_search(splits, grid, kind, derive_seed(seed, 0x96d), strat, config, threads);
        if (!report_path.empty())
          detail::emit(report_path, out, [&](std::ostream& o) { write_tuning_report(o, result.table); });
        j["best"] = {{"k", result.best.k},
                     {"alpha_prime", result.best.alpha_prime},
                     {"gamma_prime", result.best.gamma_prime},
                     {"lambda_prime", result.best.lambda_prime}};
        j["hyperparams"] = detail::hyper_json(result.hyper);
        for (const auto& r : result.table)
          if (r.point == result.best) j["cv_accuracy"] = {{"mean", r.mean_accuracy}, {"std", r.std_accuracy}};
      }
      detail::emit(out_path, out, [&](std::ostream& o) { o << j.dump(2) << "\n"; });
      return kOk;
    }

    if (select->parsed()) {
      const ModelFile model = load_model(model_path);
      FeatureSelection sel;
      try {
        sel = select_features(model.params, threshold);
      } catch (const DomainError& e) {
        throw UsageError(e.what());
      }
      const auto names = detail::feature_names(model);
      nlohmann::json per = nlohmann::json::array();
      for (const auto& s : sel.per_cluster) {
        nlohmann::json cluster = nlohmann::json::array();
        for (std::size_t l : s) cluster.push_back(names[l]);
        per.push_back(std::move(cluster));
      }
      nlohmann::json all = nlohmann::json::array();
      for (std::size_t l : sel.selected) all.push_back(names[l]);
      const nlohmann::json j{{"threshold", threshold}, {"per_cluster", per}, {"selected", all}};
      detail::emit(out_path, out, [&](std::ostream& o) { o << j.dump(2) << "\n"; });
      return kOk;
    }

    if (gme->parsed()) {
      std::pair<Dataset, GmeParams> instance;
      try {
        instance = random_gme_instance(gme_n, gme_k, gme_p, gme_m, seed, gme_gamma, gme_lambda);
      } catch (const DomainError& e) {
        throw UsageError(e.what());
      }
      const auto report = certify_equivalence(instance.first, instance.second, gme_iters);
      const nlohmann::json j{{"max_U_gap", report.max_u_gap},
                             {"max_param_gap", report.max_param_gap},
                             {"max_sfp_form_gap", report.max_sfp_form_gap},
                             {"max_loglik_decrease", report.max_loglik_decrease},
                             {"iterations", report.iterations},
                             {"loglik_trace", report.loglik_trace},
                             {"J_trace", report.j_trace}};
      detail::emit(out_path, out, [&](std::ostream& o) { o << j.dump(2) << "\n"; });
      return kOk;
    }

    if (grid_cmd->parsed()) {
      const ModelFile model = load_model(model_path);
      std::vector<std::string> names{"x1", "x2"};
      if (model.stats) {
        if (model.stats->inputs.size() != 2 || model.stats->inputs[0].type != ColumnType::numeric ||
            model.stats->inputs[1].type != ColumnType::numeric)
          throw SchemaError("decision-grid needs a model with exactly two numeric inputs");
        names = {model.stats->inputs[0].name, model.stats->inputs[1].name};
      } else if (model.params.dims() != 2) {
        throw SchemaError("decision-grid needs a model with exactly two inputs");
      }
      // bounds: flags, then data range padded by 5%, then mean +- 3 sd from training statistics
      double lo[2], hi[2];
      std::optional<RawTable> table;
      if (!data_path.empty()) table = load_csv(data_path, "");
      for (int a = 0; a < 2; ++a) {
        const auto& range = a == 0 ? x1_range : x2_range;
        if (!range.empty()) {
          lo[a] = range[0];
          hi[a] = range[1];
        } else if (table) {
          auto it = std::find_if(table->features.begin(), table->features.end(),
                                 [&](const RawColumn& c) { return c.name == names[a]; });
          if (it == table->features.end()) throw SchemaError("column '" + names[a] + "' not found in " + data_path);
          if (it->type != ColumnType::numeric) throw SchemaError("column '" + names[a] + "' is not numeric");
          lo[a] = kInf;
          hi[a] = -kInf;
          for (std::size_t r = 0; r < it->size(); ++r)
            if (!it->missing[r]) {
              lo[a] = std::min(lo[a], it->numbers[r]);
              hi[a] = std::max(hi[a], it->numbers[r]);
            }
          if (!(lo[a] <= hi[a])) throw SchemaError("column '" + names[a] + "' has no values");
          const double pad = 0.05 * std::max(hi[a] - lo[a], 1e-12);
          lo[a] -= pad;
          hi[a] += pad;
        } else if (model.stats) {
          const auto& o = model.stats->outputs[a];
          lo[a] = o.mean - 3.0 * o.sd;
          hi[a] = o.mean + 3.0 * o.sd;
        } else {
          lo[a] = kInf;
          hi[a] = -kInf;
          for (std::size_t j = 0; j < model.params.clusters(); ++j) {
            lo[a] = std::min(lo[a], model.params.centers(j, a) - 1.0);
            hi[a] = std::max(hi[a], model.params.centers(j, a) + 1.0);
          }
        }
        if (!(lo[a] < hi[a])) throw UsageError("empty range for " + names[a]);
      }
      const auto steps = static_cast<std::size_t>(resolution);
      RawTable g;
      for (int a = 0; a < 2; ++a) {
        RawColumn c;
        c.name = names[a];
        c.type = ColumnType::numeric;
        g.features.push_back(std::move(c));
      }
      for (std::size_t r = 0; r < steps; ++r)
        for (std::size_t c = 0; c < steps; ++c) {
          const double v[2] = {lo[0] + (hi[0] - lo[0]) * static_cast<double>(c) / static_cast<double>(steps - 1),
                               lo[1] + (hi[1] - lo[1]) * static_cast<double>(r) / static_cast<double>(steps - 1)};
          for (int a = 0; a < 2; ++a) {
            g.features[a].numbers.push_back(v[a]);
            g.features[a].missing.push_back(false);
            g.features[a].text.push_back(format_double(v[a]));
          }
        }
      Dataset data = model.stats ? apply_preprocess(g, *model.stats) : to_dataset(g, model.params.loss.kind);
      const auto preds = predict_all(data.features, model.params, model.hyper);
      detail::emit(out_path, out, [&](std::ostream& o) {
        o << "x1,x2,predicted_label\n";
        for (std::size_t i = 0; i < preds.size(); ++i) {
          const double y = preds[i].label;
          o << format_double(g.features[0].numbers[i]) << "," << format_double(g.features[1].numbers[i]) << ","
            << csv_escape(model.stats ? model.stats->label_text(y) : label_to_text(y, model.params.loss.kind))
            << "\n";
        }
      });
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "sfp: usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "sfp: numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const SchemaError& e) {
    err << "sfp: data error: " << e.what() << "\n";
    return kDataError;
  } catch (const IoError& e) {
    err << "sfp: data error: " << e.what() << "\n";
    return kDataError;
  } catch (const DomainError& e) {
    err << "sfp: data error: " << e.what() << "\n";
    return kDataError;
  } catch (const nlohmann::json::exception& e) {
    err << "sfp: data error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace sfp::cli
