#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "sfp/entropy_simplex.hpp"
#include "sfp/errors.hpp"
#include "sfp/model.hpp"

namespace sfp {

struct Prediction {
  double label = 0.0;
  std::vector<double> memberships;   // over the k clusters
  std::vector<double> class_scores;  // logloss: mixed class probabilities; logistic: (P(-1), P(+1))
  double score = 0.0;                // sum_j u_j z_j for scalar prototypes
};

/// Memberships of an unlabeled point: u_j ~ exp(-||x - v_j||^2_{w_j} / gamma).
inline std::vector<double> membership_of(std::span<const double> x, const ModelParams& params,
                                         double gamma) {
  if (x.size() != params.dims())
    throw DomainError("point has " + std::to_string(x.size()) + " features, model expects " +
                      std::to_string(params.dims()));
  std::vector<double> d(params.clusters());
  for (std::size_t j = 0; j < d.size(); ++j)
    d[j] = weighted_sq_distance(x, params.centers.row(j), params.weights.row(j));
  return solve_entropic_linear_min(d, gamma);
}

/// Index of the largest entry; the lowest index wins ties.
inline std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t m = 1; m < v.size(); ++m)
    if (v[m] > v[best]) best = m;
  return best;
}

/// Label minimizing the loss against the membership-weighted prototype mixture.
/// For logloss that is the class of highest mixed probability.
inline Prediction predict(std::span<const double> x, const ModelParams& params, const Hyperparams& hyper) {
  Prediction out;
  out.memberships = membership_of(x, params, hyper.gamma);
  const auto& u = out.memberships;
  switch (params.loss.kind) {
    case LossKind::logloss: {
      out.class_scores.assign(params.loss.classes, 0.0);
      for (std::size_t j = 0; j < u.size(); ++j)
        for (std::size_t m = 0; m < out.class_scores.size(); ++m)
          out.class_scores[m] += u[j] * params.prototypes[j][m];
      out.label = static_cast<double>(argmax_lowest(out.class_scores));
      break;
    }
    case LossKind::logistic: {
      for (std::size_t j = 0; j < u.size(); ++j) out.score += u[j] * params.prototypes[j][0];
      out.label = out.score >= 0.0 ? 1.0 : -1.0;
      const double pos = 1.0 / (1.0 + std::exp(-out.score));
      out.class_scores = {1.0 - pos, pos};
      break;
    }
    case LossKind::squared_error: {
      for (std::size_t j = 0; j < u.size(); ++j) out.score += u[j] * params.prototypes[j][0];
      out.label = out.score;
      break;
    }
  }
  return out;
}

inline std::vector<Prediction> predict_all(const Matrix& features, const ModelParams& params,
                                           const Hyperparams& hyper) {
  std::vector<Prediction> out;
  out.reserve(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) out.push_back(predict(features.row(i), params, hyper));
  return out;
}

/// Scalar-prototype score written as a normalized Gaussian RBF expansion,
/// sum_j z_j k_j(x) / sum_j k_j(x) with k_j(x) = exp(-||x - v_j||^2_{w_j} / gamma).
/// The kernels are evaluated unshifted, so far-away points can underflow.
inline double rbf_score(std::span<const double> x, const ModelParams& params, double gamma) {
  if (params.loss.kind == LossKind::logloss) throw DomainError("rbf_score needs scalar prototypes");
  if (x.size() != params.dims()) throw DomainError("rbf_score: dimension mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < params.clusters(); ++j) {
    const double kappa =
        std::exp(-weighted_sq_distance(x, params.centers.row(j), params.weights.row(j)) / gamma);
    num += params.prototypes[j][0] * kappa;
    den += kappa;
  }
  if (!(den > 0.0)) throw NumericError("rbf_score: every kernel underflowed");
  return num / den;
}

/// Cluster-distance representation of labeled data (n x k).
inline Matrix distance_features(const Dataset& data, const ModelParams& params, double alpha) {
  return distance_matrix(data, params, alpha);
}

struct FeatureSelection {
  std::vector<std::vector<std::size_t>> per_cluster;  // S_j, in decreasing-weight order
  std::vector<std::size_t> selected;                  // union, sorted
  double mass_threshold = 0.9;
};

/// Per cluster, the fewest features whose weights reach `threshold`, and their union.
inline FeatureSelection select_features(const ModelParams& params, double threshold = 0.9) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw DomainError("threshold must lie in (0, 1]");
  // slack for rounding in the running sum (e.g. ten weights of 0.1)
  constexpr double kSlack = 1e-12;
  FeatureSelection out;
  out.mass_threshold = threshold;
  std::vector<bool> in_union(params.dims(), false);
  for (std::size_t j = 0; j < params.clusters(); ++j) {
    auto w = params.weights.row(j);
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
    std::vector<std::size_t> chosen;
    double mass = 0.0;
    for (std::size_t l : order) {
      chosen.push_back(l);
      in_union[l] = true;
      mass += w[l];
      if (mass >= threshold - kSlack) break;
    }
    out.per_cluster.push_back(std::move(chosen));
  }
  for (std::size_t l = 0; l < in_union.size(); ++l)
    if (in_union[l]) out.selected.push_back(l);
  return out;
}

}  // namespace sfp
