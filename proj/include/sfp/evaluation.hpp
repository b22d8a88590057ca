#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "sfp/data_pipeline.hpp"
#include "sfp/errors.hpp"
#include "sfp/inference.hpp"
#include "sfp/model.hpp"
#include "sfp/random.hpp"
#include "sfp/training.hpp"

namespace sfp {

// ---------------------------------------------------------------------------
// Hyperparameter reparameterization and grids
// ---------------------------------------------------------------------------

/// Hyperparameters in the bounded (0,1) form; each maps to (1 - t) / t.
struct ReparamPoint {
  int k = 2;
  double alpha_prime = 0.5;
  double gamma_prime = 0.5;
  double lambda_prime = 0.5;

  bool operator==(const ReparamPoint&) const = default;
};

inline double from_prime(double t) { return (1.0 - t) / t; }

inline Hyperparams reparam(const ReparamPoint& pt) {
  if (!(pt.alpha_prime > 0.0 && pt.alpha_prime <= 1.0)) throw DomainError("alpha' must lie in (0, 1]");
  if (!(pt.gamma_prime > 0.0 && pt.gamma_prime < 1.0)) throw DomainError("gamma' must lie in (0, 1)");
  if (!(pt.lambda_prime > 0.0 && pt.lambda_prime < 1.0)) throw DomainError("lambda' must lie in (0, 1)");
  return {pt.k, from_prime(pt.alpha_prime), from_prime(pt.gamma_prime), from_prime(pt.lambda_prime)};
}

/// k candidates M + i (n' - M) / 4, i = 0..4, rounded and deduplicated.
inline std::vector<int> grid_cluster_counts(std::size_t n_train, int classes) {
  std::vector<int> ks;
  for (int i = 0; i <= 4; ++i) {
    const double raw = classes + i * (static_cast<double>(n_train) - classes) / 4.0;
    const int k = static_cast<int>(std::lround(raw));
    if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
  }
  return ks;
}

/// Reduced grid: gamma' in {0.55..0.95}, alpha' = gamma'/2, lambda' in
/// {0.05..0.95}, five k values (250 points before k deduplication).
/// With include_full the 5 x 10 x 10 x 10 grid is produced instead.
inline std::vector<ReparamPoint> default_grid(std::size_t n_train, int classes, bool include_full = false) {
  if (classes < 2) throw DomainError("grid needs at least two classes");
  if (n_train <= static_cast<std::size_t>(classes))
    throw DomainError("training size must exceed the number of classes");
  const auto ks = grid_cluster_counts(n_train, classes);
  auto tenth = [](int i) { return (1 + 2 * i) / 20.0; };  // 0.05 + 0.1 i
  std::vector<ReparamPoint> grid;
  for (int k : ks) {
    if (include_full) {
      for (int a = 0; a < 10; ++a)
        for (int g = 0; g < 10; ++g)
          for (int l = 0; l < 10; ++l) grid.push_back({k, tenth(a), tenth(g), tenth(l)});
    } else {
      for (int g = 0; g < 5; ++g)
        for (int l = 0; l < 10; ++l) {
          const double gp = (11 + 2 * g) / 20.0;  // 0.55 + 0.1 g
          grid.push_back({k, gp / 2.0, gp, tenth(l)});
        }
    }
  }
  return grid;
}

/// Stable 64-bit hash of a grid point's values.
inline std::uint64_t point_hash(const ReparamPoint& pt) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(pt.k));
  for (double v : {pt.alpha_prime, pt.gamma_prime, pt.lambda_prime}) h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  return h;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Area under the ROC curve via the Mann-Whitney statistic; tied scores
/// count one half.
inline double auc_score(std::span<const double> y_true, std::span<const double> scores, double positive_class) {
  if (y_true.size() != scores.size()) throw DomainError("auc: size mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t t = i; t < j; ++t)
      if (y_true[order[t]] == positive_class) {
        rank_sum += mid_rank;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DomainError("auc is undefined when only one class is present");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

struct FoldMetrics {
  double accuracy = 0.0;
  std::optional<double> sensitivity, specificity, auc;  // binary tasks only
};

/// Accuracy for any task; sensitivity, specificity and AUC when `scores`
/// (positive-class probabilities) are supplied for a binary task.
inline FoldMetrics compute_metrics(std::span<const double> y_true, std::span<const double> scores,
                                   std::span<const double> y_pred, double positive_class) {
  if (y_true.size() != y_pred.size()) throw DomainError("metrics: size mismatch");
  if (y_true.empty()) throw DomainError("metrics: no observations");
  FoldMetrics m;
  std::size_t correct = 0, tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    correct += y_true[i] == y_pred[i];
    const bool actual = y_true[i] == positive_class, called = y_pred[i] == positive_class;
    tp += actual && called;
    fn += actual && !called;
    fp += !actual && called;
    tn += !actual && !called;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
  if (!scores.empty()) {
    if (scores.size() != y_true.size()) throw DomainError("metrics: score count mismatch");
    if (tp + fn > 0) m.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (tn + fp > 0) m.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
    m.auc = auc_score(y_true, scores, positive_class);
  }
  return m;
}

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
};

inline Summary summarize(std::span<const double> v) {
  Summary s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

struct MetricReport {
  std::vector<FoldMetrics> folds;  // repeat-major order
  Summary accuracy;
  std::optional<Summary> sensitivity, specificity, auc;

  static MetricReport from_folds(std::vector<FoldMetrics> folds) {
    MetricReport r;
    r.folds = std::move(folds);
    auto collect = [&](auto member) -> std::optional<Summary> {
      std::vector<double> v;
      for (const auto& f : r.folds)
        if ((f.*member)) v.push_back(*(f.*member));
      if (v.empty()) return std::nullopt;
      return summarize(v);
    };
    std::vector<double> acc;
    for (const auto& f : r.folds) acc.push_back(f.accuracy);
    r.accuracy = summarize(acc);
    r.sensitivity = collect(&FoldMetrics::sensitivity);
    r.specificity = collect(&FoldMetrics::specificity);
    r.auc = collect(&FoldMetrics::auc);
    return r;
  }
};

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

/// Runs fn(0..count-1) on up to `threads` workers; the first exception is rethrown.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  pool.clear();
  if (error) std::rethrow_exception(error);
}

/// Fold index per row. Rows are grouped by label text and dealt round-robin
/// in shuffled order, so every fold's class counts are within one of
/// proportional. Unlabeled or regression tables are shuffled as one group.
inline std::vector<int> stratified_folds(const RawTable& table, int folds, Rng& rng, bool stratify = true) {
  if (folds < 2) throw DomainError("at least two folds are required");
  const std::size_t n = table.rows();
  if (n < static_cast<std::size_t>(folds)) throw DomainError("fewer rows than folds");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < n; ++r)
    groups[stratify && table.label ? table.label->text[r] : std::string()].push_back(r);
  std::vector<int> assignment(n, 0);
  std::size_t cursor = 0;
  for (auto& [label, rows] : groups) {
    if (stratify && table.label && rows.size() < static_cast<std::size_t>(folds))
      throw DomainError("class '" + label + "' has " + std::to_string(rows.size()) +
                        " members, fewer than the " + std::to_string(folds) + " folds");
    rng.shuffle(rows);
    for (std::size_t r : rows) assignment[r] = static_cast<int>(cursor++ % folds);
  }
  return assignment;
}

struct CvSplit {
  Dataset train, test;
  PreprocessStats stats;
  std::vector<std::size_t> train_rows, test_rows;
  int repeat = 0, fold = 0;
};

/// Repeated stratified k-fold splits, each preprocessed with statistics of
/// its own training part only.
inline std::vector<CvSplit> make_splits(const RawTable& table, LossKind target, int folds, int repeats,
                                        std::uint64_t seed) {
  if (repeats < 1) throw DomainError("repeats must be at least 1");
  std::vector<CvSplit> splits;
  for (int rep = 0; rep < repeats; ++rep) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
    const auto fold_of = stratified_folds(table, folds, rng, target != LossKind::squared_error);
    for (int f = 0; f < folds; ++f) {
      CvSplit s;
      s.repeat = rep;
      s.fold = f;
      for (std::size_t r = 0; r < fold_of.size(); ++r) (fold_of[r] == f ? s.test_rows : s.train_rows).push_back(r);
      auto [train, stats] = preprocess(table.subset(s.train_rows), target);
      s.test = apply_preprocess(table.subset(s.test_rows), stats);
      s.train = std::move(train);
      s.stats = std::move(stats);
      splits.push_back(std::move(s));
    }
  }
  return splits;
}

inline Loss loss_for(LossKind kind, const Dataset& train) { return Loss{kind, kind == LossKind::logloss ? train.classes : 0}; }

/// Fits on the split's training part and scores its test part.
inline FoldMetrics evaluate_split(const CvSplit& split, const Hyperparams& hyper, LossKind kind,
                                  const FitConfig& config) {
  const Loss loss = loss_for(kind, split.train);
  Hyperparams h = hyper;
  h.k = std::min<int>(h.k, static_cast<int>(split.train.size()));
  const FitResult fitted = fit(split.train, h, loss, config);
  const auto preds = predict_all(split.test.features, fitted.params, h);
  std::vector<double> y_pred, scores;
  for (const auto& p : preds) y_pred.push_back(p.label);
  const bool binary = (kind == LossKind::logloss && loss.classes == 2) || kind == LossKind::logistic;
  // the second label level is positive: class index 1 for logloss, +1 for logistic
  const double positive = 1.0;
  if (binary)
    for (const auto& p : preds) scores.push_back(p.class_scores[1]);
  return compute_metrics(split.test.labels, scores, y_pred, positive);
}

inline std::uint64_t split_seed(std::uint64_t base, const CvSplit& s) {
  return derive_seed(base, (static_cast<std::uint64_t>(s.repeat) << 32) | static_cast<std::uint64_t>(s.fold));
}

inline MetricReport evaluate_splits(const std::vector<CvSplit>& splits, const Hyperparams& hyper, LossKind kind,
                                    std::uint64_t fit_seed, FitConfig config = {}, int threads = 1) {
  std::vector<FoldMetrics> folds(splits.size());
  parallel_for(splits.size(), threads, [&](std::size_t s) {
    FitConfig c = config;
    c.seed = split_seed(fit_seed, splits[s]);
    folds[s] = evaluate_split(splits[s], hyper, kind, c);
  });
  return MetricReport::from_folds(std::move(folds));
}

/// Repeated stratified k-fold cross-validation of fixed hyperparameters.
inline MetricReport kfold_cv(const RawTable& table, const Hyperparams& hyper, LossKind kind, int folds,
                             int repeats, std::uint64_t seed, const FitConfig& config = {}, int threads = 1) {
  hyper.validate();
  const auto splits = make_splits(table, kind, folds, repeats, seed);
  return evaluate_splits(splits, hyper, kind, derive_seed(seed, 0xf17), config, threads);
}

// ---------------------------------------------------------------------------
// LOESS
// ---------------------------------------------------------------------------

/// Local linear regression with tricube weights over the nearest
/// floor(span * n) points (at least two).
inline std::vector<double> loess_smooth(std::span<const double> xs, std::span<const double> ys, double span = 0.75) {
  if (!(span > 0.0 && span <= 1.0)) throw DomainError("loess span must lie in (0, 1]");
  const std::size_t n = xs.size();
  if (n != ys.size()) throw DomainError("loess: size mismatch");
  if (n < 3) throw DomainError("loess needs at least three points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(xs[i] > xs[i - 1])) throw DomainError("loess: xs must be strictly increasing");

  const std::size_t q = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(span * n)));
  std::vector<double> out(n), dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < n; ++t) dist[t] = std::abs(xs[t] - xs[i]);
    std::vector<double> sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + (q - 1), sorted.end());
    const double radius = sorted[q - 1];
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t t = 0; t < n; ++t) {
      double w = 1.0;
      if (radius > 0.0) {
        const double r = dist[t] / radius;
        if (r >= 1.0) continue;
        const double c = 1.0 - r * r * r;
        w = c * c * c;
      }
      const double dx = xs[t] - xs[i];  // centered at the target point
      sw += w;
      sx += w * dx;
      sy += w * ys[t];
      sxx += w * dx * dx;
      sxy += w * dx * ys[t];
    }
    const double det = sw * sxx - sx * sx;
    // intercept of the local line, evaluated at dx = 0
    out[i] = std::abs(det) > 1e-14 * std::max(1.0, sw * sxx) ? (sxx * sy - sx * sxy) / det : sy / sw;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

struct GridRow {
  ReparamPoint point;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double seconds = 0.0;
};

enum class SelectionStrategy { best = 1, top_fraction = 2, smoothed = 3 };

struct GridSearchResult {
  ReparamPoint best;
  Hyperparams hyper;
  std::vector<GridRow> table;  // in grid order
};

inline std::vector<GridRow> evaluate_grid(const std::vector<CvSplit>& splits, const std::vector<ReparamPoint>& grid,
                                          LossKind kind, std::uint64_t seed, const FitConfig& config = {},
                                          int threads = 1) {
  std::vector<GridRow> rows(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t g) {
    const auto start = std::chrono::steady_clock::now();
    const auto report = evaluate_splits(splits, reparam(grid[g]), kind, derive_seed(seed, point_hash(grid[g])), config);
    rows[g] = {grid[g], report.accuracy.mean, report.accuracy.std,
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
  });
  return rows;
}

namespace detail {

inline std::size_t best_row(const std::vector<GridRow>& rows) {
  std::size_t best = 0;
  for (std::size_t r = 1; r < rows.size(); ++r)
    if (rows[r].mean_accuracy > rows[best].mean_accuracy) best = r;
  return best;
}

/// Moves `current` along one axis to the argmax of LOESS-smoothed accuracy
/// among rows that agree with it on every other axis.
inline ReparamPoint smooth_along_axis(const std::vector<GridRow>& rows, ReparamPoint current, int axis,
                                      bool alpha_follows_gamma, double span) {
  auto coord = [&](const ReparamPoint& p, int a) -> double {
    switch (a) {
      case 0: return p.k;
      case 1: return p.alpha_prime;
      case 2: return p.gamma_prime;
      default: return p.lambda_prime;
    }
  };
  std::vector<std::pair<double, std::size_t>> slice;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    bool same = true;
    for (int a = 0; a < 4 && same; ++a) {
      if (a == axis) continue;
      if (alpha_follows_gamma && a == 1) continue;
      same = coord(rows[r].point, a) == coord(current, a);
    }
    if (same) slice.emplace_back(coord(rows[r].point, axis), r);
  }
  std::stable_sort(slice.begin(), slice.end(), [](auto& a, auto& b) { return a.first < b.first; });
  // one accuracy per distinct axis value (first in grid order)
  std::vector<double> xs, ys;
  std::vector<std::size_t> idx;
  for (const auto& [x, r] : slice) {
    if (!xs.empty() && xs.back() == x) continue;
    xs.push_back(x);
    ys.push_back(rows[r].mean_accuracy);
    idx.push_back(r);
  }
  if (xs.size() < 2) return current;
  const auto smoothed = xs.size() >= 3 ? loess_smooth(xs, ys, span) : ys;
  std::size_t best = 0;
  for (std::size_t t = 1; t < smoothed.size(); ++t)
    if (smoothed[t] > smoothed[best]) best = t;
  return rows[idx[best]].point;
}

}  // namespace detail

/// Picks a point from evaluated grid rows.
///  best: highest mean accuracy, earliest grid index on ties.
///  top_fraction: per hyperparameter, the mean over the top q% rows (k rounded).
///  smoothed: start at the best row, then along k, alpha', gamma', lambda' in
///    turn take the argmax of LOESS-smoothed accuracy with the other axes held.
inline ReparamPoint select_point(const std::vector<GridRow>& rows, SelectionStrategy strategy,
                                 double top_percent = 20.0, double span = 0.75) {
  if (rows.empty()) throw DomainError("empty grid");
  const std::size_t best = detail::best_row(rows);
  switch (strategy) {
    case SelectionStrategy::best: return rows[best].point;
    case SelectionStrategy::top_fraction: {
      std::vector<std::size_t> order(rows.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return rows[a].mean_accuracy > rows[b].mean_accuracy; });
      const std::size_t take = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(rows.size() * top_percent / 100.0)));
      double k = 0, a = 0, g = 0, l = 0;
      for (std::size_t t = 0; t < take; ++t) {
        const auto& p = rows[order[t]].point;
        k += p.k;
        a += p.alpha_prime;
        g += p.gamma_prime;
        l += p.lambda_prime;
      }
      const double m = static_cast<double>(take);
      return {static_cast<int>(std::lround(k / m)), a / m, g / m, l / m};
    }
    case SelectionStrategy::smoothed: {
      bool coupled = true;
      for (const auto& r : rows) coupled = coupled && std::abs(r.point.alpha_prime - r.point.gamma_prime / 2) < 1e-12;
      ReparamPoint current = rows[best].point;
      for (int axis = 0; axis < 4; ++axis) {
        if (coupled && axis == 1) continue;
        current = detail::smooth_along_axis(rows, current, axis, coupled, span);
      }
      return current;
    }
  }
  return rows[best].point;
}

/// Cross-validated grid search over `splits` (already preprocessed per fold).
inline GridSearchResult grid_search(const std::vector<CvSplit>& splits, const std::vector<ReparamPoint>& grid,
                                    LossKind kind, std::uint64_t seed,
                                    SelectionStrategy strategy = SelectionStrategy::smoothed,
                                    const FitConfig& config = {}, int threads = 1, double top_percent = 20.0) {
  if (grid.empty()) throw DomainError("empty grid");
  GridSearchResult out;
  out.table = evaluate_grid(splits, grid, kind, seed, config, threads);
  out.best = select_point(out.table, strategy, top_percent);
  out.hyper = reparam(out.best);
  return out;
}

inline GridSearchResult grid_search(const RawTable& table, const std::vector<ReparamPoint>& grid, LossKind kind,
                                    int folds, int repeats, std::uint64_t seed,
                                    SelectionStrategy strategy = SelectionStrategy::smoothed,
                                    const FitConfig& config = {}, int threads = 1) {
  const auto splits = make_splits(table, kind, folds, repeats, seed);
  return grid_search(splits, grid, kind, derive_seed(seed, 0x96d), strategy, config, threads);
}

/// Training-set size seen by the inner folds of a table with n rows.
inline std::size_t inner_train_size(std::size_t n, int folds) {
  return n - (n + static_cast<std::size_t>(folds) - 1) / static_cast<std::size_t>(folds);
}

struct NestedCvResult {
  MetricReport report;
  std::vector<Hyperparams> chosen;  // one per outer split
};

/// Outer repeated k-fold; each outer training part is tuned by an inner
/// k-fold grid search over the reduced (or full) grid.
inline NestedCvResult nested_cv(const RawTable& table, LossKind kind, int folds, int repeats, int inner_folds,
                                std::uint64_t seed, SelectionStrategy strategy = SelectionStrategy::smoothed,
                                bool full_grid = false, const FitConfig& config = {}, int threads = 1) {
  NestedCvResult out;
  std::vector<FoldMetrics> metrics;
  for (int rep = 0; rep < repeats; ++rep) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
    const auto fold_of = stratified_folds(table, folds, rng, kind != LossKind::squared_error);
    for (int f = 0; f < folds; ++f) {
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t r = 0; r < fold_of.size(); ++r) (fold_of[r] == f ? test_rows : train_rows).push_back(r);
      const RawTable train_table = table.subset(train_rows);
      const std::uint64_t outer_seed = derive_seed(seed, 0x100000 + static_cast<std::uint64_t>(rep * folds + f));

      auto inner = make_splits(train_table, kind, inner_folds, 1, outer_seed);
      const int classes = std::max(2, inner.front().train.classes);
      const auto grid = default_grid(inner_train_size(train_rows.size(), inner_folds), classes, full_grid);
      const auto tuned = grid_search(inner, grid, kind, derive_seed(outer_seed, 1), strategy, config, threads);

      CvSplit outer;
      outer.repeat = rep;
      outer.fold = f;
      auto [train, stats] = preprocess(train_table, kind);
      outer.test = apply_preprocess(table.subset(test_rows), stats);
      outer.train = std::move(train);
      outer.stats = std::move(stats);
      FitConfig c = config;
      c.seed = derive_seed(outer_seed, 2);
      metrics.push_back(evaluate_split(outer, tuned.hyper, kind, c));
      out.chosen.push_back(tuned.hyper);
    }
  }
  out.report = MetricReport::from_folds(std::move(metrics));
  return out;
}

/// One CSV row per grid point: k, alpha', gamma', lambda', accuracy mean and std, seconds.
inline void write_tuning_report(std::ostream& out, const std::vector<GridRow>& rows) {
  out << "k,alpha_prime,gamma_prime,lambda_prime,mean_accuracy,std_accuracy,runtime_seconds\n";
  for (const auto& r : rows)
    out << r.point.k << "," << format_double(r.point.alpha_prime) << "," << format_double(r.point.gamma_prime) << ","
        << format_double(r.point.lambda_prime) << "," << format_double(r.mean_accuracy) << ","
        << format_double(r.std_accuracy) << "," << format_double(r.seconds) << "\n";
}

}  // namespace sfp
