#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sfp/entropy_simplex.hpp"
#include "sfp/errors.hpp"
#include "sfp/losses.hpp"
#include "sfp/matrix.hpp"

namespace sfp {

struct Hyperparams {
  int k = 2;
  double alpha = 1.0;   // strength of the label term
  double gamma = 1.0;   // membership entropy
  double lambda = 1.0;  // feature-weight entropy

  void validate() const {
    if (k < 2) throw DomainError("k must be at least 2");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be >= 0");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be > 0");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
  }

  bool operator==(const Hyperparams&) const = default;
};

/// Feature matrix (n x p) with one label per row.
struct Dataset {
  Matrix features;
  std::vector<double> labels;
  int classes = 0;  // M for classification, 0 otherwise

  std::size_t size() const { return features.rows(); }
  std::size_t dims() const { return features.cols(); }
  bool has_labels() const { return !labels.empty(); }

  void validate(const Loss& loss) const {
    if (size() == 0) throw DomainError("dataset is empty");
    if (dims() == 0) throw DomainError("dataset has no features");
    if (labels.size() != size()) throw DomainError("label count does not match row count");
    for (double y : labels) loss.check_label(y);
  }

  Dataset subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.classes = classes;
    out.features = Matrix(rows.size(), dims());
    out.labels.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto src = features.row(rows[r]);
      std::copy(src.begin(), src.end(), out.features.row(r).begin());
      if (has_labels()) out.labels.push_back(labels[rows[r]]);
    }
    return out;
  }

  bool operator==(const Dataset&) const = default;
};

/// Centers V, per-cluster feature weights W and label prototypes Z.
struct ModelParams {
  Matrix centers;  // k x p
  Matrix weights;  // k x p, rows on the simplex
  std::vector<Prototype> prototypes;
  Loss loss;

  std::size_t clusters() const { return centers.rows(); }
  std::size_t dims() const { return centers.cols(); }

  void validate() const {
    if (weights.rows() != centers.rows() || weights.cols() != centers.cols())
      throw DomainError("weights and centers disagree in shape");
    if (prototypes.size() != clusters()) throw DomainError("one prototype per cluster required");
    for (const auto& z : prototypes) loss.check_prototype(z);
    for (std::size_t j = 0; j < weights.rows(); ++j) {
      double s = 0.0;
      for (double w : weights.row(j)) {
        if (w < 0.0) throw DomainError("negative feature weight");
        s += w;
      }
      if (std::abs(s - 1.0) > 1e-9) throw DomainError("weight row does not sum to one");
    }
  }

  bool operator==(const ModelParams& o) const {
    return centers == o.centers && weights == o.weights && prototypes == o.prototypes &&
           loss.kind == o.loss.kind && loss.classes == o.loss.classes;
  }
};

/// n x k matrix, each row a point on the simplex.
using MembershipMatrix = Matrix;

/// sum_l w_l (x_l - v_l)^2
inline double weighted_sq_distance(std::span<const double> x, std::span<const double> v,
                                   std::span<const double> w) noexcept {
  double acc = 0.0;
  for (std::size_t l = 0; l < x.size(); ++l) {
    const double d = x[l] - v[l];
    acc += w[l] * d * d;
  }
  return acc;
}

namespace detail {

inline void check_labels(const Dataset& data, const Loss& loss) {
  if (data.labels.size() != data.size()) throw DomainError("labels required for the supervised term");
  for (double y : data.labels) loss.check_label(y);
}

/// l(y, z_j) by lookup. Logloss and logistic labels take a handful of
/// values, so their losses are tabulated once per prototype set.
class LabelCost {
 public:
  explicit LabelCost(const ModelParams& params) : loss_(params.loss), protos_(&params.prototypes) {
    if (loss_.kind == LossKind::squared_error) return;
    const std::size_t slots = loss_.kind == LossKind::logloss ? static_cast<std::size_t>(loss_.classes) : 2;
    table_ = Matrix(params.clusters(), slots);
    for (std::size_t j = 0; j < params.clusters(); ++j)
      for (std::size_t m = 0; m < slots; ++m) {
        const double y = loss_.kind == LossKind::logloss ? static_cast<double>(m) : (m == 0 ? -1.0 : 1.0);
        table_(j, m) = loss_.eval(y, params.prototypes[j]);
      }
  }

  double operator()(double y, std::size_t j) const {
    switch (loss_.kind) {
      case LossKind::logloss: return table_(j, static_cast<std::size_t>(y));
      case LossKind::logistic: return table_(j, y > 0 ? 1 : 0);
      case LossKind::squared_error: {
        const double r = y - (*protos_)[j][0];
        return r * r;
      }
    }
    return kInf;
  }

 private:
  Loss loss_;
  const std::vector<Prototype>* protos_;
  Matrix table_;
};

/// Per-row label loss against every prototype: L(i, j) = l(y_i, z_j).
inline Matrix label_losses(const Dataset& data, const ModelParams& params) {
  check_labels(data, params.loss);
  const std::size_t n = data.size(), k = params.clusters();
  const LabelCost cost(params);
  Matrix out(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) out(i, j) = cost(data.labels[i], j);
  return out;
}

/// Computes distance rows with cluster-contiguous copies of the centers,
/// weights and alpha-scaled label costs, so the inner loops run over clusters.
class DistanceKernel {
 public:
  /// Labels must already be checked when alpha > 0.
  DistanceKernel(const ModelParams& params, double alpha)
      : k_(params.clusters()), p_(params.dims()), alpha_(alpha), kind_(params.loss.kind) {
    centers_t_ = transpose(params.centers);
    weights_t_ = transpose(params.weights);
    if (alpha_ <= 0.0) return;
    if (kind_ == LossKind::squared_error) {
      targets_.resize(k_);
      for (std::size_t j = 0; j < k_; ++j) targets_[j] = params.prototypes[j][0];
      return;
    }
    const LabelCost cost(params);
    const std::size_t slots = kind_ == LossKind::logloss ? static_cast<std::size_t>(params.loss.classes) : 2;
    label_t_ = Matrix(slots, k_);
    for (std::size_t m = 0; m < slots; ++m) {
      const double y = kind_ == LossKind::logloss ? static_cast<double>(m) : (m == 0 ? -1.0 : 1.0);
      for (std::size_t j = 0; j < k_; ++j) label_t_(m, j) = alpha_ * cost(y, j);
    }
  }

  void row(const Dataset& data, std::size_t i, std::span<double> out) const {
    auto x = data.features.row(i);
    double* o = out.data();
    std::fill(o, o + k_, 0.0);
    for (std::size_t l = 0; l < p_; ++l) {
      const double xl = x[l];
      const double* v = centers_t_.row(l).data();
      const double* w = weights_t_.row(l).data();
      for (std::size_t j = 0; j < k_; ++j) {
        const double d = xl - v[j];
        o[j] += w[j] * d * d;
      }
    }
    if (alpha_ <= 0.0) return;
    const double y = data.labels[i];
    if (kind_ == LossKind::squared_error) {
      for (std::size_t j = 0; j < k_; ++j) {
        const double r = y - targets_[j];
        o[j] += alpha_ * r * r;
      }
      return;
    }
    const std::size_t slot = kind_ == LossKind::logloss ? static_cast<std::size_t>(y) : (y > 0 ? 1 : 0);
    const double* c = label_t_.row(slot).data();
    for (std::size_t j = 0; j < k_; ++j) o[j] += c[j];
  }

  static Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
    return t;
  }

 private:
  std::size_t k_, p_;
  double alpha_;
  LossKind kind_;
  Matrix centers_t_, weights_t_, label_t_;
  std::vector<double> targets_;
};

}  // namespace detail

/// d_ij = ||x_i - v_j||^2_{w_j} + alpha * l(y_i, z_j). With alpha = 0 the label
/// term is skipped entirely and the dataset may be unlabeled.
inline Matrix distance_matrix(const Dataset& data, const ModelParams& params, double alpha) {
  if (data.dims() != params.dims())
    throw DomainError("distance matrix: data has " + std::to_string(data.dims()) +
                      " features, model has " + std::to_string(params.dims()));
  if (!(alpha >= 0.0)) throw DomainError("alpha must be >= 0");
  if (alpha > 0.0) detail::check_labels(data, params.loss);
  const detail::DistanceKernel kernel(params, alpha);
  Matrix d(data.size(), params.clusters());
  for (std::size_t i = 0; i < data.size(); ++i) kernel.row(data, i, d.row(i));
  return d;
}

/// Terms of the SFP objective, reported separately for diagnostics.
struct ObjectiveTerms {
  double within = 0.0;              // sum u ||x - v||^2_w
  double label = 0.0;               // sum u l(y, z), before alpha
  double membership_negentropy = 0.0;  // sum u ln u
  double weight_negentropy = 0.0;      // sum w ln w

  double total(const Hyperparams& h) const {
    const double lbl = h.alpha > 0.0 ? h.alpha * label : 0.0;
    return within + lbl + h.gamma * membership_negentropy + h.lambda * weight_negentropy;
  }
};

inline ObjectiveTerms objective_terms(const Dataset& data, const MembershipMatrix& u,
                                      const ModelParams& params, bool with_labels = true) {
  const std::size_t n = data.size(), k = params.clusters();
  if (u.rows() != n || u.cols() != k) throw DomainError("membership matrix has wrong shape");
  ObjectiveTerms t;
  for (std::size_t i = 0; i < n; ++i) {
    auto x = data.features.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      const double uij = u(i, j);
      t.membership_negentropy += xlogx(uij);
      if (uij == 0.0) continue;
      t.within += uij * weighted_sq_distance(x, params.centers.row(j), params.weights.row(j));
    }
  }
  if (with_labels) {
    detail::check_labels(data, params.loss);
    const detail::LabelCost cost(params);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        const double uij = u(i, j);
        if (uij > 0.0) t.label += uij * cost(data.labels[i], j);
      }
  }
  for (double w : params.weights.data()) t.weight_negentropy += xlogx(w);
  return t;
}

/// SFP objective: within-cluster weighted scatter + alpha * label surrogate
/// + gamma * membership negentropy + lambda * weight negentropy.
inline double objective(const Dataset& data, const MembershipMatrix& u, const ModelParams& params,
                        const Hyperparams& hyper) {
  return objective_terms(data, u, params, hyper.alpha > 0.0).total(hyper);
}

}  // namespace sfp
