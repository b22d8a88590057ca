#pragma once

// Conversions between library types and the oracle's plain containers, plus
// small random instances shared by several test files.

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "sfp/sfp.hpp"

namespace fixture {

inline std::vector<std::vector<double>> rows(const sfp::Matrix& m) { return m.to_rows(); }

inline oracle::Instance to_instance(const sfp::Dataset& d, const sfp::MembershipMatrix& u,
                                    const sfp::ModelParams& p) {
  oracle::Instance s;
  s.x = rows(d.features);
  s.y = d.labels;
  s.v = rows(p.centers);
  s.w = rows(p.weights);
  s.z = p.prototypes;
  s.u = rows(u);
  s.kind = p.loss.kind == sfp::LossKind::logloss ? 0 : (p.loss.kind == sfp::LossKind::logistic ? 1 : 2);
  return s;
}

inline std::vector<double> random_simplex(sfp::Rng& rng, std::size_t m) {
  std::vector<double> v(m);
  double s = 0.0;
  for (double& x : v) s += (x = -std::log(1.0 - rng.uniform()));
  for (double& x : v) x /= s;
  return v;
}

/// Random labeled data, model and memberships for a given loss.
struct Random {
  sfp::Dataset data;
  sfp::ModelParams params;
  sfp::MembershipMatrix u;
};

inline Random random_instance(std::uint64_t seed, std::size_t n, std::size_t k, std::size_t p,
                              sfp::LossKind kind, int classes = 2) {
  sfp::Rng rng(seed);
  Random r;
  r.data.features = sfp::Matrix(n, p);
  for (double& x : r.data.features.data()) x = rng.normal();
  r.data.classes = kind == sfp::LossKind::logloss ? classes : 0;
  for (std::size_t i = 0; i < n; ++i) {
    switch (kind) {
      case sfp::LossKind::logloss: r.data.labels.push_back(static_cast<double>(rng.below(classes))); break;
      case sfp::LossKind::logistic: r.data.labels.push_back(rng.uniform() < 0.5 ? -1.0 : 1.0); break;
      case sfp::LossKind::squared_error: r.data.labels.push_back(rng.normal(0.0, 3.0)); break;
    }
  }
  r.params.loss = {kind, kind == sfp::LossKind::logloss ? classes : 0};
  r.params.centers = sfp::Matrix(k, p);
  for (double& x : r.params.centers.data()) x = rng.normal();
  r.params.weights = sfp::Matrix(k, p);
  for (std::size_t j = 0; j < k; ++j) {
    auto w = random_simplex(rng, p);
    std::copy(w.begin(), w.end(), r.params.weights.row(j).begin());
    if (kind == sfp::LossKind::logloss) {
      // keep every class strictly possible so losses stay finite
      auto z = random_simplex(rng, static_cast<std::size_t>(classes));
      for (double& v : z) v = 0.9 * v + 0.1 / classes;
      r.params.prototypes.push_back(z);
    } else {
      r.params.prototypes.push_back({rng.normal(0.0, 2.0)});
    }
  }
  r.u = sfp::Matrix(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = random_simplex(rng, k);
    std::copy(row.begin(), row.end(), r.u.row(i).begin());
  }
  return r;
}

/// mixture3 as the library generates it, in its raw coordinates, with classes 0..2.
inline sfp::Dataset mixture3(std::size_t n, std::uint64_t seed) {
  return sfp::gen_synthetic(sfp::SyntheticKind::mixture3, n, seed);
}

inline sfp::Dataset iris_like_dataset(unsigned seed) {
  const auto raw = oracle::iris_like(seed);
  sfp::Dataset d;
  d.classes = 3;
  d.features = sfp::Matrix::from_rows(raw.x);
  for (int y : raw.y) d.labels.push_back(y);
  return d;
}

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sfp-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
