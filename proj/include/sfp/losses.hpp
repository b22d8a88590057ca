#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sfp/entropy_simplex.hpp"
#include "sfp/errors.hpp"

namespace sfp {

enum class LossKind { logloss, logistic, squared_error };

inline std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::logloss: return "logloss";
    case LossKind::logistic: return "logistic";
    case LossKind::squared_error: return "squared_error";
  }
  return "?";
}

inline LossKind loss_kind_from_string(std::string_view name) {
  if (name == "logloss") return LossKind::logloss;
  if (name == "logistic") return LossKind::logistic;
  if (name == "squared_error" || name == "se") return LossKind::squared_error;
  throw DomainError("unknown loss kind '" + std::string(name) + "'");
}

/// Floor applied to logloss prototype entries and the saturation level of the
/// logistic prototype, |z| <= ln(1 / kPrototypeEpsilon).
inline constexpr double kPrototypeEpsilon = 1e-12;
inline const double kLogisticSaturation = -std::log(kPrototypeEpsilon);

/// A label prototype: an M-simplex vector for logloss, a single real otherwise.
using Prototype = std::vector<double>;

/// Loss function together with its label domain.
///
/// Labels are doubles: logloss uses 0-based class indices in [0, M), logistic
/// uses -1/+1, squared error any real.
struct Loss {
  LossKind kind = LossKind::logloss;
  int classes = 2;  // M, only meaningful for logloss

  std::size_t prototype_size() const { return kind == LossKind::logloss ? classes : 1; }

  void check_label(double y) const {
    switch (kind) {
      case LossKind::logloss:
        if (!(y >= 0 && y < classes && y == std::floor(y)))
          throw DomainError("logloss label " + std::to_string(y) + " outside {0.." +
                            std::to_string(classes - 1) + "}");
        break;
      case LossKind::logistic:
        if (y != 1.0 && y != -1.0)
          throw DomainError("logistic label must be -1 or +1, got " + std::to_string(y));
        break;
      case LossKind::squared_error:
        if (!std::isfinite(y)) throw DomainError("squared-error label must be finite");
        break;
    }
  }

  void check_prototype(std::span<const double> z) const {
    if (z.size() != prototype_size()) throw DomainError("prototype has wrong dimension");
  }

  /// l(y, z); logloss with z_y = 0 yields +inf.
  double eval(double y, std::span<const double> z) const {
    check_label(y);
    check_prototype(z);
    switch (kind) {
      case LossKind::logloss: {
        const double p = z[static_cast<std::size_t>(y)];
        return p > 0.0 ? -std::log(p) : kInf;
      }
      case LossKind::logistic: {
        const double m = -y * z[0];
        // ln(1 + e^m) without overflow
        return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
      }
      case LossKind::squared_error: {
        const double r = y - z[0];
        return r * r;
      }
    }
    return kInf;
  }

  /// Number of weighted label sums a prototype solve needs.
  std::size_t stat_size() const {
    switch (kind) {
      case LossKind::logloss: return static_cast<std::size_t>(classes);
      case LossKind::logistic: return 2;
      case LossKind::squared_error: return 1;
    }
    return 1;
  }

  /// Where label y lands in the sufficient statistics: stats[slot] += u * factor.
  /// The label is assumed valid.
  std::pair<std::size_t, double> stat_slot(double y) const {
    switch (kind) {
      case LossKind::logloss: return {static_cast<std::size_t>(y), 1.0};
      case LossKind::logistic: return {y > 0 ? 1u : 0u, 1.0};
      case LossKind::squared_error: return {0, y};
    }
    return {0, 0.0};
  }

  /// Closed-form minimizer from accumulated label sums and the total weight.
  Prototype from_stats(std::span<const double> stats, double total) const {
    if (!(total > 0.0)) throw DomainError("prototype: total membership weight is zero");
    switch (kind) {
      case LossKind::logloss: {
        Prototype z(stats.begin(), stats.end());
        for (double& v : z) v /= total;
        return z;
      }
      case LossKind::logistic: {
        const double neg = stats[0], pos = stats[1];
        if (pos <= 0.0) return {-kLogisticSaturation};
        if (neg <= 0.0) return {kLogisticSaturation};
        return {std::clamp(std::log(pos / neg), -kLogisticSaturation, kLogisticSaturation)};
      }
      case LossKind::squared_error: return {stats[0] / total};
    }
    return {};
  }

  /// argmin_z sum_i u_i l(y_i, z) in closed form.
  Prototype solve(std::span<const double> labels, std::span<const double> weights) const {
    if (labels.size() != weights.size()) throw DomainError("prototype: size mismatch");
    std::vector<double> stats(stat_size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      check_label(labels[i]);
      total += weights[i];
      const auto [slot, factor] = stat_slot(labels[i]);
      stats[slot] += weights[i] * factor;
    }
    return from_stats(stats, total);
  }

  /// Prototype minimizing the loss of a single observed label.
  Prototype solve_single(double y) const {
    const double one = 1.0;
    return stabilize(solve(std::span<const double>(&y, 1), std::span<const double>(&one, 1)));
  }

  /// Logloss prototypes are floored at kPrototypeEpsilon per entry and
  /// renormalized so that no class becomes unreachable for a cluster.
  /// Other kinds pass through.
  Prototype stabilize(Prototype z) const {
    if (kind != LossKind::logloss) return z;
    double total = 0.0;
    for (double& v : z) {
      v = std::max(v, kPrototypeEpsilon);
      total += v;
    }
    for (double& v : z) v /= total;
    return z;
  }
};

}  // namespace sfp
