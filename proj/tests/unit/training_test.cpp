#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sfp/sfp.hpp"

using namespace sfp;

namespace {

Dataset labeled(std::vector<std::vector<double>> x, std::vector<double> y, int classes = 2) {
  Dataset d;
  d.features = Matrix::from_rows(x);
  d.labels = std::move(y);
  d.classes = classes;
  return d;
}

void expect_rows_on_simplex(const Matrix& m, double tol = 1e-12) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, tol);
  }
}

}  // namespace

TEST(UpdateMemberships, Examples) {
  const double g = 0.37;
  const auto u = update_memberships(Matrix{{2.5, 2.5}, {0.0, g * std::log(3.0)}, {0.0, kInf}}, g);
  EXPECT_NEAR(u(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(u(1, 0), 0.75, 1e-12);
  EXPECT_NEAR(u(1, 1), 0.25, 1e-12);
  EXPECT_EQ(u(2, 0), 1.0);
  EXPECT_EQ(u(2, 1), 0.0);
  const auto ref = oracle::simplex_descent({0.0, g * std::log(3.0)}, g);
  EXPECT_NEAR(ref[0], 0.75, 1e-6);
}

TEST(UpdateMemberships, AllInfiniteRowIsNumericFailure) {
  EXPECT_THROW(update_memberships(Matrix{{1.0, 2.0}, {kInf, kInf}}, 1.0), NumericError);
}

TEST(UpdateCenters, Examples) {
  const auto d = labeled({{0, 0}, {2, 2}, {9, 9}}, {0, 0, 1});
  const Matrix crisp{{1, 0}, {1, 0}, {0, 1}};
  const auto c = update_centers(d, crisp);
  EXPECT_DOUBLE_EQ(c(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(c(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(c(1, 0), 9.0);

  const auto uni = update_centers(d, Matrix(3, 2, 0.5));
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(uni(j, 0), 11.0 / 3.0, 1e-14);

  const auto one_d = labeled({{0}, {10}}, {0, 1});
  EXPECT_NEAR(update_centers(one_d, Matrix{{3}, {1}})(0, 0), 2.5, 1e-15);
}

TEST(UpdateCenters, EmptyColumnNeedsAFallback) {
  const auto d = labeled({{0}, {1}}, {0, 1});
  const Matrix u{{1, 0}, {1, 0}};
  EXPECT_THROW(update_centers(d, u), NumericError);
  const Matrix prev{{5}, {7}};
  EXPECT_EQ(update_centers(d, u, &prev)(1, 0), 7.0);
}

TEST(UpdatePrototypes, Examples) {
  const Loss log2{LossKind::logloss, 2};
  const auto d = labeled({{0}, {1}, {2}, {3}}, {0, 0, 1, 1});
  const Matrix crisp{{1, 0}, {1, 0}, {0, 1}, {1, 0}};
  const auto z = update_prototypes(d, crisp, log2);
  EXPECT_NEAR(z[0][0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(z[0][1], 1.0 / 3.0, 1e-15);

  const auto same = update_prototypes(d, Matrix(4, 3, 1.0 / 3.0), log2);
  EXPECT_EQ(same[0], same[1]);
  EXPECT_EQ(same[1], same[2]);

  const auto dl = labeled({{0}, {1}}, {1, -1}, 0);
  EXPECT_EQ(update_prototypes(dl, Matrix{{1}, {1}}, Loss{LossKind::logistic, 0})[0][0], 0.0);
}

TEST(UpdatePrototypes, AgreesWithPerClusterSolve) {
  for (auto kind : {LossKind::logloss, LossKind::logistic, LossKind::squared_error}) {
    const auto r = fixture::random_instance(31, 40, 3, 2, kind, 4);
    const auto z = update_prototypes(r.data, r.u, r.params.loss);
    for (std::size_t j = 0; j < 3; ++j) {
      std::vector<double> col(40);
      for (std::size_t i = 0; i < 40; ++i) col[i] = r.u(i, j);
      const auto want = r.params.loss.solve(r.data.labels, col);
      for (std::size_t m = 0; m < want.size(); ++m) EXPECT_NEAR(z[j][m], want[m], 1e-12);
    }
  }
}

TEST(UpdateWeights, Examples) {
  // one point, one cluster at the origin: scatter is (1, 2)
  const auto d = labeled({{1.0, std::sqrt(2.0)}}, {0});
  const auto w = update_weights(d, Matrix{{1}}, Matrix{{0, 0}}, 1.0);
  const auto ref = oracle::simplex_descent({1.0, 2.0}, 1.0);
  EXPECT_NEAR(ref[0], 0.73106, 1e-5);
  EXPECT_NEAR(w(0, 0), 0.73106, 1e-5);
  EXPECT_NEAR(w(0, 1), 0.26894, 1e-5);
  EXPECT_NEAR(w(0, 0), 1.0 / (1.0 + std::exp(-1.0)), 1e-12);

  const auto flat = update_weights(labeled({{1, 1, -1}}, {0}), Matrix{{1}}, Matrix{{0, 0, 0}}, 0.3);
  for (double v : flat.row(0)) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);

  // a feature with no spread takes all the weight
  const auto d2 = labeled({{0, 1}, {0, -1}}, {0, 1});
  const auto w2 = update_weights(d2, Matrix{{1}, {1}}, Matrix{{0, 0}}, 1e-3);
  EXPECT_NEAR(w2(0, 0), 1.0, 1e-12);
  EXPECT_TRUE(std::isfinite(w2(0, 1)));
}

TEST(Initialize, Contracts) {
  const auto d = labeled({{0, 0}, {1, 0}, {0, 1}, {5, 5}}, {0, 1, 0, 1});
  const Loss log2{LossKind::logloss, 2};
  const auto m = initialize(d, 4, log2, 42);
  auto as_rows = m.centers.to_rows(), data_rows = d.features.to_rows();
  std::sort(as_rows.begin(), as_rows.end());
  std::sort(data_rows.begin(), data_rows.end());
  EXPECT_EQ(as_rows, data_rows);
  for (double w : m.weights.data()) EXPECT_EQ(w, 0.5);
  EXPECT_EQ(initialize(d, 4, log2, 42), m);
  EXPECT_THROW(initialize(d, 5, log2, 42), DomainError);

  const auto dl = labeled({{0}, {1}}, {1, 1}, 0);
  const auto ml = initialize(dl, 1, Loss{LossKind::logistic, 0}, 3);
  EXPECT_NEAR(ml.prototypes[0][0], std::log(1e12), 1e-9);

  // logloss: one-hot on the sampled class, floored
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_GT(*std::min_element(m.prototypes[j].begin(), m.prototypes[j].end()), 0.0);
    EXPECT_GT(*std::max_element(m.prototypes[j].begin(), m.prototypes[j].end()), 1.0 - 1e-11);
  }
}

TEST(Fit, FixedPointStopsAfterOneIteration) {
  const auto d = labeled({{0, 0}, {0, 0}, {10, 10}, {10, 10}}, {0, 0, 1, 1});
  ModelParams init;
  init.loss = {LossKind::logloss, 2};
  init.centers = Matrix{{0, 0}, {10, 10}};
  init.weights = Matrix(2, 2, 0.5);
  init.prototypes = {init.loss.stabilize({1, 0}), init.loss.stabilize({0, 1})};
  FitConfig c;
  c.record_trace = true;
  const auto r = fit_from(d, Hyperparams{2, 1.0, 0.1, 1.0}, init, c);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_NEAR(r.params.centers(1, 0), 10.0, 1e-12);
}

TEST(Fit, EachBlockUpdateDescends) {
  for (auto kind : {LossKind::logloss, LossKind::logistic, LossKind::squared_error}) {
    const auto r = fixture::random_instance(8, 60, 4, 3, kind, 3);
    const Hyperparams h{4, 0.8, 0.4, 0.6};
    ModelParams m = initialize(r.data, 4, r.params.loss, 1);
    Matrix u = update_memberships(distance_matrix(r.data, m, h.alpha), h.gamma);
    double last = objective(r.data, u, m, h);
    auto step = [&](const char* what) {
      const double now = objective(r.data, u, m, h);
      EXPECT_LE(now, last + 1e-9 * (1.0 + std::abs(last))) << what;
      last = now;
    };
    for (int it = 0; it < 8; ++it) {
      u = update_memberships(distance_matrix(r.data, m, h.alpha), h.gamma);
      step("memberships");
      expect_rows_on_simplex(u);
      m.centers = update_centers(r.data, u);
      step("centers");
      m.prototypes = update_prototypes(r.data, u, m.loss);
      step("prototypes");
      m.weights = update_weights(r.data, u, m.centers, h.lambda);
      step("weights");
      expect_rows_on_simplex(m.weights);
    }
  }
}

TEST(Fit, TraceIsNonincreasing) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto d = fixture::mixture3(200, seed);
    FitConfig c;
    c.seed = seed;
    c.record_trace = true;
    const auto r = fit(d, Hyperparams{4, 1.0, 0.05, 25.0}, Loss{LossKind::logloss, 3}, c);
    ASSERT_EQ(r.objective_trace.size(), static_cast<std::size_t>(r.iterations));
    for (std::size_t t = 1; t < r.objective_trace.size(); ++t)
      EXPECT_LE(r.objective_trace[t], r.objective_trace[t - 1] + 1e-9 * std::abs(r.objective_trace[t - 1]));
    expect_rows_on_simplex(r.memberships);
    expect_rows_on_simplex(r.params.weights);
    EXPECT_EQ(r.final_objective, r.objective_trace.back());
  }
}

TEST(Fit, CentersIgnoreWeights) {
  const auto r = fixture::random_instance(12, 50, 3, 4, LossKind::logloss);
  const auto c1 = update_centers(r.data, r.u);
  Rng rng(1);
  ModelParams other = r.params;
  for (std::size_t j = 0; j < 3; ++j) {
    auto w = fixture::random_simplex(rng, 4);
    std::copy(w.begin(), w.end(), other.weights.row(j).begin());
  }
  const auto c2 = update_centers(r.data, r.u);
  for (std::size_t t = 0; t < c1.data().size(); ++t) EXPECT_NEAR(c1.data()[t], c2.data()[t], 1e-12);
}

TEST(Fit, Deterministic) {
  const auto d = fixture::mixture3(150, 4);
  FitConfig c;
  c.seed = 77;
  c.record_trace = true;
  const Hyperparams h{5, 1.0, 0.2, 2.0};
  const auto a = fit(d, h, Loss{LossKind::logloss, 3}, c);
  const auto b = fit(d, h, Loss{LossKind::logloss, 3}, c);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.memberships, b.memberships);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Fit, RestartsKeepTheLowestObjective) {
  const auto d = fixture::mixture3(200, 9);
  const Hyperparams h{4, 1.0, 0.05, 25.0};
  const Loss loss{LossKind::logloss, 3};
  FitConfig c;
  c.seed = 3;
  c.restarts = 6;
  const auto best = fit(d, h, loss, c);
  EXPECT_TRUE(std::isfinite(best.final_objective));
  for (int r = 0; r < 6; ++r) {
    FitConfig single;
    single.record_trace = true;
    single.seed = r == 0 ? c.seed : derive_seed(c.seed, static_cast<std::uint64_t>(r));
    EXPECT_LE(best.final_objective, fit(d, h, loss, single).final_objective);
  }
}

TEST(Fit, EmptyClusterIsReseated) {
  // the second center is so far away that it receives no membership at all
  const auto d = labeled({{0, 0}, {0.1, 0}, {0, 0.1}, {3, 3}, {3.1, 3}}, {0, 0, 0, 1, 1});
  ModelParams init;
  init.loss = {LossKind::logloss, 2};
  init.centers = Matrix{{0, 0}, {1e4, 1e4}};
  init.weights = Matrix(2, 2, 0.5);
  init.prototypes = {init.loss.stabilize({1, 0}), init.loss.stabilize({0, 1})};
  FitConfig c;
  c.record_trace = true;
  const auto r = fit_from(d, Hyperparams{2, 1.0, 1e-3, 1.0}, init, c);
  EXPECT_LT(r.params.centers(1, 0), 10.0);
  const auto mass = column_mass(r.memberships);
  EXPECT_GT(mass[1], 0.5);
}

TEST(Fit, InputErrors) {
  const Loss loss{LossKind::logloss, 2};
  Dataset empty;
  empty.features = Matrix(0, 2);
  EXPECT_THROW(fit(empty, Hyperparams{2, 1, 1, 1}, loss, {}), DomainError);
  const auto d = labeled({{0}, {1}}, {0, 1});
  FitConfig bad;
  bad.max_iters = 0;
  EXPECT_THROW(fit(d, Hyperparams{2, 1, 1, 1}, loss, bad), DomainError);
  bad = {};
  bad.restarts = 0;
  EXPECT_THROW(fit(d, Hyperparams{2, 1, 1, 1}, loss, bad), DomainError);
  EXPECT_THROW(fit(d, Hyperparams{3, 1, 1, 1}, loss, {}), DomainError);
  EXPECT_THROW(fit(labeled({{0}, {1}}, {0, 2}), Hyperparams{2, 1, 1, 1}, loss, {}), DomainError);
}
