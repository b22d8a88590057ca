#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sfp/entropy_simplex.hpp"
#include "sfp/errors.hpp"
#include "sfp/losses.hpp"
#include "sfp/model.hpp"
#include "sfp/random.hpp"

namespace sfp {

struct FitConfig {
  int max_iters = 100;
  double center_tol = 1e-6;  // max-norm center displacement that counts as "unchanged"
  std::uint64_t seed = 0;
  bool record_trace = false;
  int restarts = 1;  // independent random starts; the lowest final objective wins

  void validate() const {
    if (max_iters < 1) throw DomainError("max_iters must be at least 1");
    if (restarts < 1) throw DomainError("restarts must be at least 1");
    if (!(center_tol > 0.0)) throw DomainError("center_tol must be positive");
  }
};

struct FitResult {
  ModelParams params;
  MembershipMatrix memberships;
  std::vector<double> objective_trace;  // one value per iteration, after the weight update
  int iterations = 0;
  bool converged = false;
  double final_objective = 0.0;  // NaN unless record_trace or restarts > 1 asked for it
};

/// Column mass below which a cluster is treated as empty.
inline constexpr double kDegenerateMass = 1e-300;

/// Centers at k distinct random observations, prototypes fitted to those
/// observations' labels, uniform feature weights.
inline ModelParams initialize(const Dataset& data, int k, const Loss& loss, std::uint64_t seed) {
  if (k < 1) throw DomainError("k must be positive");
  if (static_cast<std::size_t>(k) > data.size())
    throw DomainError("k = " + std::to_string(k) + " exceeds the number of observations (" +
                      std::to_string(data.size()) + ")");
  Rng rng(seed);
  const auto picks = rng.sample_without_replacement(data.size(), static_cast<std::size_t>(k));
  const std::size_t p = data.dims();
  ModelParams params;
  params.loss = loss;
  params.centers = Matrix(k, p);
  params.weights = Matrix(k, p, 1.0 / static_cast<double>(p));
  params.prototypes.reserve(k);
  for (std::size_t j = 0; j < picks.size(); ++j) {
    auto src = data.features.row(picks[j]);
    std::copy(src.begin(), src.end(), params.centers.row(j).begin());
    params.prototypes.push_back(loss.solve_single(data.labels[picks[j]]));
  }
  return params;
}

/// Row-wise entropic solve: u_i = argmin <d_i, u> + gamma * sum u ln u.
inline MembershipMatrix update_memberships(const Matrix& distances, double gamma) {
  MembershipMatrix u(distances.rows(), distances.cols());
  for (std::size_t i = 0; i < distances.rows(); ++i) {
    try {
      solve_entropic_linear_min(distances.row(i), gamma, u.row(i));
    } catch (const DomainError& e) {
      if (!(gamma > 0.0)) throw;
      throw NumericError("membership update, row " + std::to_string(i) + ": " + e.what());
    }
  }
  return u;
}

inline std::vector<double> column_mass(const MembershipMatrix& u) {
  std::vector<double> mass(u.cols(), 0.0);
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t j = 0; j < u.cols(); ++j) mass[j] += u(i, j);
  return mass;
}

inline std::vector<std::size_t> degenerate_clusters(const MembershipMatrix& u) {
  std::vector<std::size_t> out;
  const auto mass = column_mass(u);
  for (std::size_t j = 0; j < mass.size(); ++j)
    if (mass[j] < kDegenerateMass) out.push_back(j);
  return out;
}

/// v_j = sum_i u_ij x_i / sum_i u_ij. Feature weights play no role.
/// Columns with no mass keep the row from `previous`; without it they are an error.
inline Matrix update_centers(const Dataset& data, const MembershipMatrix& u,
                             const Matrix* previous = nullptr) {
  const std::size_t n = data.size(), p = data.dims(), k = u.cols();
  if (u.rows() != n) throw DomainError("update_centers: membership rows do not match data");
  Matrix sums(p, k, 0.0);  // feature-major so the inner loops run over clusters
  std::vector<double> mass(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ui = u.row(i).data();
    auto x = data.features.row(i);
    for (std::size_t j = 0; j < k; ++j) mass[j] += ui[j];
    for (std::size_t l = 0; l < p; ++l) {
      const double xl = x[l];
      double* s = sums.row(l).data();
      for (std::size_t j = 0; j < k; ++j) s[j] += ui[j] * xl;
    }
  }
  Matrix centers(k, p);
  for (std::size_t j = 0; j < k; ++j) {
    auto c = centers.row(j);
    if (mass[j] < kDegenerateMass) {
      if (!previous) throw NumericError("update_centers: cluster " + std::to_string(j) + " is empty");
      auto prev = previous->row(j);
      std::copy(prev.begin(), prev.end(), c.begin());
      continue;
    }
    for (std::size_t l = 0; l < p; ++l) c[l] = sums(l, j) / mass[j];
  }
  return centers;
}

/// z_j = argmin_z sum_i u_ij l(y_i, z), closed form per loss (not stabilized).
inline std::vector<Prototype> update_prototypes(const Dataset& data, const MembershipMatrix& u,
                                                const Loss& loss,
                                                const std::vector<Prototype>* previous = nullptr) {
  const std::size_t n = data.size(), k = u.cols(), slots = loss.stat_size();
  if (u.rows() != n) throw DomainError("update_prototypes: membership rows do not match data");
  detail::check_labels(data, loss);
  Matrix stats_t(slots, k, 0.0);
  std::vector<double> mass(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ui = u.row(i).data();
    const auto [slot, factor] = loss.stat_slot(data.labels[i]);
    double* s = stats_t.row(slot).data();
    for (std::size_t j = 0; j < k; ++j) {
      mass[j] += ui[j];
      s[j] += ui[j] * factor;
    }
  }
  std::vector<double> stats(slots);
  std::vector<Prototype> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    if (mass[j] < kDegenerateMass && previous) {
      out.push_back((*previous)[j]);
      continue;
    }
    for (std::size_t m = 0; m < slots; ++m) stats[m] = stats_t(m, j);
    out.push_back(loss.from_stats(stats, mass[j]));
  }
  return out;
}

/// s_jl = sum_i u_ij (x_il - v_jl)^2, then w_j = argmin <s_j, w> + lambda * sum w ln w.
inline Matrix update_weights(const Dataset& data, const MembershipMatrix& u, const Matrix& centers,
                             double lambda) {
  const std::size_t n = data.size(), p = data.dims(), k = u.cols();
  if (centers.rows() != k || centers.cols() != p)
    throw DomainError("update_weights: centers have wrong shape");
  const Matrix centers_t = detail::DistanceKernel::transpose(centers);
  Matrix scatter_t(p, k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ui = u.row(i).data();
    auto x = data.features.row(i);
    for (std::size_t l = 0; l < p; ++l) {
      const double xl = x[l];
      const double* v = centers_t.row(l).data();
      double* s = scatter_t.row(l).data();
      for (std::size_t j = 0; j < k; ++j) {
        const double d = xl - v[j];
        s[j] += ui[j] * d * d;
      }
    }
  }
  const Matrix scatter = detail::DistanceKernel::transpose(scatter_t);
  Matrix weights(k, p);
  for (std::size_t j = 0; j < k; ++j) solve_entropic_linear_min(scatter.row(j), lambda, weights.row(j));
  return weights;
}

namespace detail {

/// Reseats each empty cluster at the observation farthest from its own
/// nearest cluster, with uniform weights and a single-point prototype.
inline void reseat_clusters(const Dataset& data, const Matrix& distances,
                            std::span<const std::size_t> empty, ModelParams& params) {
  const std::size_t n = data.size(), p = data.dims();
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = distances.row(i);
    nearest[i] = *std::min_element(row.begin(), row.end());
  }
  std::vector<bool> taken(n, false);
  for (std::size_t j : empty) {
    std::size_t best = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double d = std::isfinite(nearest[i]) ? nearest[i] : std::numeric_limits<double>::max();
      if (d > far) {
        far = d;
        best = i;
      }
    }
    taken[best] = true;
    auto src = data.features.row(best);
    std::copy(src.begin(), src.end(), params.centers.row(j).begin());
    for (double& w : params.weights.row(j)) w = 1.0 / static_cast<double>(p);
    params.prototypes[j] = params.loss.solve_single(data.labels[best]);
  }
}

inline double max_abs_displacement(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t t = 0; t < a.data().size(); ++t)
    m = std::max(m, std::abs(a.data()[t] - b.data()[t]));
  return m;
}

}  // namespace detail

/// Block coordinate descent on the SFP objective, starting from `init`.
/// Each iteration: distances, memberships, centers and prototypes, weights.
inline FitResult fit_from(const Dataset& data, const Hyperparams& hyper, ModelParams init,
                          const FitConfig& config) {
  hyper.validate();
  config.validate();
  data.validate(init.loss);
  init.validate();
  if (init.dims() != data.dims()) throw DomainError("initial model has wrong dimension");

  FitResult result;
  result.params = std::move(init);
  ModelParams& params = result.params;

  const bool supervised = hyper.alpha > 0.0;
  if (supervised) detail::check_labels(data, params.loss);
  std::vector<double> drow(params.clusters());
  // distances and memberships row by row, so the n x k distance matrix is never stored
  MembershipMatrix u(data.size(), params.clusters());
  auto assign = [&] {
    const detail::DistanceKernel kernel(params, hyper.alpha);
    for (std::size_t i = 0; i < data.size(); ++i) {
      kernel.row(data, i, drow);
      try {
        solve_entropic_linear_min(drow, hyper.gamma, u.row(i));
      } catch (const DomainError& e) {
        throw NumericError("membership update, row " + std::to_string(i) + ": " + e.what());
      }
    }
  };

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    assign();

    auto empty = degenerate_clusters(u);
    if (!empty.empty()) {
      detail::reseat_clusters(data, distance_matrix(data, params, hyper.alpha), empty, params);
      assign();
    }

    Matrix centers = update_centers(data, u, &params.centers);
    auto prototypes = update_prototypes(data, u, params.loss, &params.prototypes);
    for (auto& z : prototypes) z = params.loss.stabilize(std::move(z));
    const double moved = detail::max_abs_displacement(centers, params.centers);

    params.centers = std::move(centers);
    params.prototypes = std::move(prototypes);
    params.weights = update_weights(data, u, params.centers, hyper.lambda);
    result.iterations = iter;

    if (config.record_trace)
      result.objective_trace.push_back(objective(data, u, params, hyper));
    if (moved < config.center_tol) {
      result.converged = true;
      break;
    }
  }
  result.memberships = std::move(u);
  if (config.record_trace)
    result.final_objective = result.objective_trace.back();
  else if (config.restarts > 1)
    result.final_objective = objective(data, result.memberships, params, hyper);
  else
    result.final_objective = std::numeric_limits<double>::quiet_NaN();
  return result;
}

/// Random initialization followed by block coordinate descent. With
/// several restarts, start r > 0 is seeded by derive_seed(seed, r).
inline FitResult fit(const Dataset& data, const Hyperparams& hyper, const Loss& loss,
                     const FitConfig& config) {
  if (data.size() == 0) throw DomainError("cannot fit an empty dataset");
  hyper.validate();
  config.validate();
  data.validate(loss);
  FitResult best = fit_from(data, hyper, initialize(data, hyper.k, loss, config.seed), config);
  for (int r = 1; r < config.restarts; ++r) {
    const auto seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
    FitResult next = fit_from(data, hyper, initialize(data, hyper.k, loss, seed), config);
    if (next.final_objective < best.final_objective) best = std::move(next);
  }
  return best;
}

}  // namespace sfp
