#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "sfp/entropy_simplex.hpp"
#include "sfp/errors.hpp"
#include "sfp/losses.hpp"
#include "sfp/matrix.hpp"
#include "sfp/model.hpp"
#include "sfp/random.hpp"
#include "sfp/training.hpp"

namespace sfp {

/// Generative mixture of experts restricted to diagonal Gaussian inputs whose
/// variances are gamma / (2 w_jl) for a weight simplex w_j, and categorical
/// experts. The log-likelihood carries the penalty -(lambda/gamma) sum w ln w.
struct GmeParams {
  std::vector<double> mixing;  // pi_j
  Matrix means;                // k x p
  Matrix weights;              // k x p, rows on the simplex
  Matrix experts;              // k x M, rows on the simplex
  double gamma = 1.0;
  double lambda = 1.0;
  bool fixed_mixing = true;  // hold pi = 1/k instead of re-estimating it

  static constexpr double kVarianceFloor = 1e-8;

  std::size_t components() const { return means.rows(); }
  std::size_t dims() const { return means.cols(); }
  std::size_t classes() const { return experts.cols(); }

  double variance(std::size_t j, std::size_t l) const {
    return std::max(gamma / (2.0 * weights(j, l)), kVarianceFloor);
  }

  Matrix variances() const {
    Matrix v(components(), dims());
    for (std::size_t j = 0; j < components(); ++j)
      for (std::size_t l = 0; l < dims(); ++l) v(j, l) = variance(j, l);
    return v;
  }

  void validate() const {
    const std::size_t k = components();
    if (k == 0) throw DomainError("GME needs at least one component");
    if (mixing.size() != k || weights.rows() != k || experts.rows() != k || weights.cols() != dims())
      throw DomainError("GME parameter blocks disagree in shape");
    if (!(gamma > 0.0) || !(lambda > 0.0)) throw DomainError("GME gamma and lambda must be positive");
    auto check_simplex = [](std::span<const double> v, const char* what) {
      double s = 0.0;
      for (double x : v) {
        if (x < 0.0) throw DomainError(std::string("negative entry in ") + what);
        s += x;
      }
      if (std::abs(s - 1.0) > 1e-9) throw DomainError(std::string(what) + " does not sum to one");
    };
    check_simplex(mixing, "mixing proportions");
    for (std::size_t j = 0; j < k; ++j) {
      check_simplex(weights.row(j), "weight row");
      check_simplex(experts.row(j), "expert row");
      for (double w : weights.row(j))
        if (!(w > 0.0)) throw DomainError("weights must be positive (finite variances)");
    }
  }

  /// -(lambda / gamma) sum w ln w
  double penalty() const {
    double s = 0.0;
    for (double w : weights.data()) s += xlogx(w);
    return -(lambda / gamma) * s;
  }
};

/// ln q(x; eta_j): diagonal Gaussian log-density.
inline double gme_log_gate_density(std::span<const double> x, const GmeParams& g, std::size_t j) {
  double acc = 0.0;
  for (std::size_t l = 0; l < x.size(); ++l) {
    const double var = g.variance(j, l);
    const double d = x[l] - g.means(j, l);
    acc += -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
  }
  return acc;
}

/// -ln pi_j - ln q(x_i; eta_j) - ln f(y_i; theta_j) for every (i, j).
inline Matrix gme_costs(const Dataset& data, const GmeParams& g) {
  const std::size_t n = data.size(), k = g.components();
  Matrix c(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(data.labels[i]);
    for (std::size_t j = 0; j < k; ++j) {
      const double f = g.experts(j, y);
      const double pi = g.mixing[j];
      c(i, j) = (f > 0.0 && pi > 0.0) ? -std::log(pi) - gme_log_gate_density(data.features.row(i), g, j) - std::log(f)
                                       : kInf;
    }
  }
  return c;
}

/// Penalized log-likelihood sum_i ln sum_j pi_j q f + P(psi).
/// A point with zero density under every component yields -inf.
inline double gme_loglik(const Dataset& data, const GmeParams& g) {
  const Matrix c = gme_costs(data, g);
  double total = 0.0;
  for (std::size_t i = 0; i < c.rows(); ++i) {
    auto row = c.row(i);
    const double lo = *std::min_element(row.begin(), row.end());
    if (!std::isfinite(lo)) return -kInf;
    double s = 0.0;
    for (double v : row) s += std::exp(-(v - lo));
    total += -lo + std::log(s);
  }
  return total + g.penalty();
}

/// E-step posteriors pi_j q f / sum_j' pi_j' q f, computed from the densities
/// themselves (log-space fallback only when every density underflows).
inline MembershipMatrix gme_posteriors(const Dataset& data, const GmeParams& g) {
  const std::size_t n = data.size(), k = g.components();
  MembershipMatrix u(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(data.labels[i]);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double q = 1.0;
      for (std::size_t l = 0; l < g.dims(); ++l) {
        const double var = g.variance(j, l);
        const double d = data.features(i, l) - g.means(j, l);
        q *= std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
      }
      u(i, j) = g.mixing[j] * q * g.experts(j, y);
      total += u(i, j);
    }
    if (total > 0.0 && std::isfinite(total)) {
      for (double& v : u.row(i)) v /= total;
      continue;
    }
    const Matrix c = gme_costs(data.subset(std::vector<std::size_t>{i}), g);
    try {
      solve_entropic_linear_min(c.row(0), 1.0, u.row(i));
    } catch (const DomainError&) {
      throw NumericError("E-step: observation " + std::to_string(i) + " has zero density under every component");
    }
  }
  return u;
}

/// argmin over the simplex of <s, w> - c sum ln w + lambda sum w ln w.
/// Stationarity gives, per coordinate, lambda ln w - c / w = -(s_l + lambda + mu);
/// the multiplier mu is found by bisection so that the weights sum to one.
inline std::vector<double> solve_log_barrier_entropic(std::span<const double> s, double c, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (c <= 0.0) return solve_entropic_linear_min(s, lambda);
  const double s_min = *std::min_element(s.begin(), s.end());

  // t = ln w solves  lambda t - c e^{-t} + b = 0  (increasing, concave in t).
  auto log_weight = [&](double b) {
    // Both -b/lambda and, for b > 0, min(ln(c/b), 0) lie left of the root;
    // from the left Newton increases monotonically to it.
    double t = -b / lambda;
    if (b > 0.0) t = std::max(t, std::min(std::log(c / b), 0.0));
    for (int it = 0; it < 200; ++it) {
      const double e = c * std::exp(-t);
      const double f = lambda * t - e + b;
      const double step = f / (lambda + e);
      t -= step;
      if (std::abs(step) <= 1e-15 * (1.0 + std::abs(t))) break;
    }
    return t;
  };
  auto weights_at = [&](double mu, std::vector<double>& w) {
    double sum = 0.0;
    for (std::size_t l = 0; l < s.size(); ++l) {
      w[l] = std::exp(log_weight(s[l] - s_min + lambda + mu));
      sum += w[l];
    }
    return sum;
  };

  std::vector<double> w(s.size());
  double lo = -1.0, hi = 1.0;
  while (weights_at(lo, w) < 1.0) lo = 2.0 * lo - 1.0;
  while (weights_at(hi, w) > 1.0) hi = 2.0 * hi + 1.0;
  for (int it = 0; it < 400 && hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (weights_at(mid, w) > 1.0 ? lo : hi) = mid;
  }
  const double sum = weights_at(0.5 * (lo + hi), w);
  for (double& v : w) v /= sum;
  return w;
}

/// M-step: maximizes sum_ij u_ij (ln pi_j + ln q + ln f) + P(psi) block by block.
/// A component with no posterior mass is reseated on the least explained
/// observation with uniform weights.
inline GmeParams gme_m_step(const Dataset& data, const MembershipMatrix& u, const GmeParams& current) {
  const std::size_t n = data.size(), k = current.components(), p = current.dims(), M = current.classes();
  GmeParams next = current;
  std::vector<double> mass = column_mass(u);

  for (std::size_t j = 0; j < k; ++j) {
    if (mass[j] < kDegenerateMass) {
      std::size_t worst = 0;
      double worst_fit = kInf;
      for (std::size_t i = 0; i < n; ++i) {
        auto row = u.row(i);
        const double best = *std::max_element(row.begin(), row.end());
        if (best < worst_fit) {
          worst_fit = best;
          worst = i;
        }
      }
      for (std::size_t l = 0; l < p; ++l) next.means(j, l) = data.features(worst, l);
      for (std::size_t l = 0; l < p; ++l) next.weights(j, l) = 1.0 / static_cast<double>(p);
      const Loss loss{LossKind::logloss, static_cast<int>(M)};
      const auto z = loss.solve_single(data.labels[worst]);
      std::copy(z.begin(), z.end(), next.experts.row(j).begin());
      continue;
    }
    std::vector<double> mean(p, 0.0), freq(M, 0.0), scatter(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double uij = u(i, j);
      for (std::size_t l = 0; l < p; ++l) mean[l] += uij * data.features(i, l);
      freq[static_cast<std::size_t>(data.labels[i])] += uij;
    }
    for (double& v : mean) v /= mass[j];
    for (double& v : freq) v /= mass[j];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < p; ++l) {
        const double d = data.features(i, l) - mean[l];
        scatter[l] += u(i, j) * d * d;
      }
    const auto w = solve_log_barrier_entropic(scatter, current.gamma * mass[j] / 2.0, current.lambda);
    std::copy(mean.begin(), mean.end(), next.means.row(j).begin());
    std::copy(w.begin(), w.end(), next.weights.row(j).begin());
    std::copy(freq.begin(), freq.end(), next.experts.row(j).begin());
  }
  if (current.fixed_mixing) {
    std::fill(next.mixing.begin(), next.mixing.end(), 1.0 / static_cast<double>(k));
  } else {
    for (std::size_t j = 0; j < k; ++j) next.mixing[j] = mass[j] / static_cast<double>(n);
  }
  return next;
}

/// One EM iteration: E-step posteriors at `g`, then the M-step on them.
inline std::pair<GmeParams, MembershipMatrix> em_step(const Dataset& data, const GmeParams& g) {
  MembershipMatrix u = gme_posteriors(data, g);
  GmeParams next = gme_m_step(data, u, g);
  return {std::move(next), std::move(u)};
}

/// J(U, psi) = sum u (D + l) + sum u ln u - P(psi), with D = -ln pi - ln q
/// and l = -ln f.
inline double j_function(const Dataset& data, const MembershipMatrix& u, const GmeParams& g) {
  const Matrix c = gme_costs(data, g);
  double value = 0.0;
  for (std::size_t t = 0; t < c.data().size(); ++t) {
    const double uij = u.data()[t];
    if (uij > 0.0) value += uij * c.data()[t];
    value += xlogx(uij);
  }
  return value - g.penalty();
}

/// Expected complete-data log-likelihood Q(psi, psi_t) for posteriors u_t.
inline double q_function(const Dataset& data, const MembershipMatrix& u_t, const GmeParams& g) {
  const Matrix c = gme_costs(data, g);
  double value = 0.0;
  for (std::size_t t = 0; t < c.data().size(); ++t)
    if (u_t.data()[t] > 0.0) value -= u_t.data()[t] * c.data()[t];
  return value + g.penalty();
}

/// The same parameters read as an SFP model with logloss prototypes.
inline ModelParams to_sfp_params(const GmeParams& g) {
  ModelParams m;
  m.centers = g.means;
  m.weights = g.weights;
  m.loss = Loss{LossKind::logloss, static_cast<int>(g.classes())};
  for (std::size_t j = 0; j < g.components(); ++j) {
    auto r = g.experts.row(j);
    m.prototypes.emplace_back(r.begin(), r.end());
  }
  return m;
}

/// gamma * J(U, psi) rewritten through the SFP objective with alpha = gamma:
///   SFP(U, V, W, Z) - (gamma/2) sum_ij u_ij sum_l ln w_jl + gamma * n * (ln k + (p/2) ln(pi gamma)).
/// Valid when pi = 1/k and no variance sits on the floor.
inline double sfp_form_of_scaled_j(const Dataset& data, const MembershipMatrix& u, const GmeParams& g) {
  const std::size_t n = data.size(), k = g.components(), p = g.dims();
  const Hyperparams h{static_cast<int>(k), g.gamma, g.gamma, g.lambda};
  const double sfp = objective(data, u, to_sfp_params(g), h);
  double log_weight_term = 0.0;
  const auto mass = column_mass(u);
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    for (double w : g.weights.row(j)) s += std::log(w);
    log_weight_term += mass[j] * s;
  }
  const double constant =
      g.gamma * static_cast<double>(n) *
      (std::log(static_cast<double>(k)) + 0.5 * static_cast<double>(p) * std::log(std::numbers::pi * g.gamma));
  return sfp - 0.5 * g.gamma * log_weight_term + constant;
}

struct EquivalenceReport {
  double max_u_gap = 0.0;      // max_t ||U_EM - U_BCD||_inf
  double max_param_gap = 0.0;  // max_t ||psi_EM - psi_BCD||_inf
  double max_sfp_form_gap = 0.0;  // relative gap of gamma*J vs. its SFP rewrite (fixed mixing only)
  double max_loglik_decrease = 0.0;
  std::vector<double> loglik_trace;  // EM, at psi^0..psi^T
  std::vector<double> j_trace;       // BCD, J(U^t, psi^t) after each membership step
  int iterations = 0;
};

inline double max_abs_gap(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t t = 0; t < a.data().size(); ++t) m = std::max(m, std::abs(a.data()[t] - b.data()[t]));
  return m;
}

inline double param_gap(const GmeParams& a, const GmeParams& b) {
  double m = std::max({max_abs_gap(a.means, b.means), max_abs_gap(a.weights, b.weights),
                       max_abs_gap(a.experts, b.experts)});
  for (std::size_t j = 0; j < a.mixing.size(); ++j) m = std::max(m, std::abs(a.mixing[j] - b.mixing[j]));
  return m;
}

/// Runs T EM iterations and T block-coordinate iterations on J from the same
/// start and measures how far the two iterate sequences drift apart. The BCD
/// membership block is the entropic simplex solve with unit temperature on
/// the costs D + l; the parameter block reuses the M-step.
inline EquivalenceReport certify_equivalence(const Dataset& data, const GmeParams& init, int iterations) {
  if (iterations < 0) throw DomainError("iteration count must be nonnegative");
  init.validate();
  data.validate(Loss{LossKind::logloss, static_cast<int>(init.classes())});
  if (data.dims() != init.dims()) throw DomainError("GME init has wrong dimension");

  EquivalenceReport rep;
  rep.iterations = iterations;
  GmeParams em = init, bcd = init;
  rep.loglik_trace.push_back(gme_loglik(data, em));
  for (int t = 0; t < iterations; ++t) {
    auto [em_next, u_em] = em_step(data, em);

    const Matrix costs = gme_costs(data, bcd);
    MembershipMatrix u_bcd(costs.rows(), costs.cols());
    for (std::size_t i = 0; i < costs.rows(); ++i) solve_entropic_linear_min(costs.row(i), 1.0, u_bcd.row(i));
    rep.j_trace.push_back(j_function(data, u_bcd, bcd));
    if (bcd.fixed_mixing) {
      const double scaled = bcd.gamma * rep.j_trace.back();
      const double rewritten = sfp_form_of_scaled_j(data, u_bcd, bcd);
      rep.max_sfp_form_gap = std::max(rep.max_sfp_form_gap, std::abs(scaled - rewritten) / (1.0 + std::abs(scaled)));
    }
    GmeParams bcd_next = gme_m_step(data, u_bcd, bcd);

    rep.max_u_gap = std::max(rep.max_u_gap, max_abs_gap(u_em, u_bcd));
    em = std::move(em_next);
    bcd = std::move(bcd_next);
    rep.max_param_gap = std::max(rep.max_param_gap, param_gap(em, bcd));

    const double ll = gme_loglik(data, em);
    rep.max_loglik_decrease = std::max(rep.max_loglik_decrease, rep.loglik_trace.back() - ll);
    rep.loglik_trace.push_back(ll);
  }
  return rep;
}

/// Random labeled data and starting parameters for certification runs.
/// Data: k well-spread Gaussian blobs in p dimensions, each with a dominant class.
inline std::pair<Dataset, GmeParams> random_gme_instance(std::size_t n, std::size_t k, std::size_t p, std::size_t M,
                                                         std::uint64_t seed, double gamma = 1.0, double lambda = 1.0,
                                                         bool fixed_mixing = true) {
  if (n < k || k < 1 || p < 1 || M < 2) throw DomainError("invalid GME instance shape");
  Rng rng(seed);
  Matrix blob_centers(k, p);
  for (double& v : blob_centers.data()) v = rng.uniform(-3.0, 3.0);
  Dataset data;
  data.classes = static_cast<int>(M);
  data.features = Matrix(n, p);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i % k;
    for (std::size_t l = 0; l < p; ++l) data.features(i, l) = rng.normal(blob_centers(b, l), 1.0);
    data.labels[i] = rng.uniform() < 0.8 ? static_cast<double>(b % M) : static_cast<double>(rng.below(M));
  }
  // every class present
  for (std::size_t m = 0; m < M && m < n; ++m) data.labels[m] = static_cast<double>(m);

  GmeParams g;
  g.gamma = gamma;
  g.lambda = lambda;
  g.fixed_mixing = fixed_mixing;
  g.means = Matrix(k, p);
  g.weights = Matrix(k, p);
  g.experts = Matrix(k, M);
  g.mixing.assign(k, 1.0 / static_cast<double>(k));
  if (!fixed_mixing) {
    double s = 0.0;
    for (double& v : g.mixing) s += (v = 0.5 + rng.uniform());
    for (double& v : g.mixing) v /= s;
  }
  const auto picks = rng.sample_without_replacement(n, k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t l = 0; l < p; ++l) g.means(j, l) = data.features(picks[j], l);
    double sw = 0.0, se = 0.0;
    for (std::size_t l = 0; l < p; ++l) sw += (g.weights(j, l) = 0.2 + rng.uniform());
    for (std::size_t l = 0; l < p; ++l) g.weights(j, l) /= sw;
    for (std::size_t m = 0; m < M; ++m) se += (g.experts(j, m) = 0.2 + rng.uniform());
    for (std::size_t m = 0; m < M; ++m) g.experts(j, m) /= se;
  }
  return {std::move(data), std::move(g)};
}

}  // namespace sfp
