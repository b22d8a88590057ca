#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sfp/sfp.hpp"

using namespace sfp;

namespace {

std::vector<double> row_of(const Matrix& m, std::size_t i) {
  auto r = m.row(i);
  return {r.begin(), r.end()};
}

double oracle_loglik(const Dataset& d, const GmeParams& g) {
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.components(); ++j) {
      std::vector<double> var(g.dims());
      for (std::size_t l = 0; l < g.dims(); ++l) var[l] = g.gamma / (2.0 * g.weights(j, l));
      s += g.mixing[j] * std::exp(oracle::log_normal_diag(row_of(d.features, i), row_of(g.means, j), var)) *
           g.experts(j, static_cast<std::size_t>(d.labels[i]));
    }
    total += std::log(s);
  }
  double pen = 0.0;
  for (double w : g.weights.data()) pen += oracle::xlogx(w);
  return total - g.lambda / g.gamma * pen;
}

}  // namespace

TEST(GmeLoglik, MatchesDirectSum) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [d, g] = random_gme_instance(25, 3, 2, 3, seed, 1.5, 0.7, seed % 2 == 0);
    EXPECT_NEAR(gme_loglik(d, g), oracle_loglik(d, g), 1e-9 * std::abs(oracle_loglik(d, g)));
  }
}

TEST(GmeLoglik, SingleComponentIsAPlainProduct) {
  const auto [d, g] = random_gme_instance(20, 1, 3, 2, 4);
  double want = g.penalty();
  for (std::size_t i = 0; i < d.size(); ++i)
    want += gme_log_gate_density(d.features.row(i), g, 0) + std::log(g.experts(0, static_cast<std::size_t>(d.labels[i])));
  EXPECT_NEAR(gme_loglik(d, g), want, 1e-10);
  const auto u = gme_posteriors(d, g);
  for (double v : u.data()) EXPECT_EQ(v, 1.0);
}

TEST(GmePosteriors, SymmetricComponentsSplitEvenly) {
  auto [d, g] = random_gme_instance(15, 2, 2, 2, 8);
  for (std::size_t l = 0; l < 2; ++l) {
    g.means(1, l) = g.means(0, l);
    g.weights(1, l) = g.weights(0, l);
    g.experts(1, l) = g.experts(0, l);
  }
  g.mixing = {0.5, 0.5};
  const auto u = gme_posteriors(d, g);
  for (double v : u.data()) EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(GmeEm, LikelihoodNeverDecreases) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto [d, g] = random_gme_instance(30, 3, 2, 2, 100 + seed, 1.0, 0.5, seed % 3 == 0);
    double last = gme_loglik(d, g);
    for (int t = 0; t < 15; ++t) {
      g = em_step(d, g).first;
      const double now = gme_loglik(d, g);
      EXPECT_GE(now, last - 1e-9 * std::abs(last)) << "seed " << seed << " step " << t;
      last = now;
    }
  }
}

TEST(GmeEm, MStepMaximizesQ) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [d, g] = random_gme_instance(30, 2, 3, 3, seed, 0.8, 1.2);
    const auto u = gme_posteriors(d, g);
    const auto next = gme_m_step(d, u, g);
    EXPECT_GE(q_function(d, u, next), q_function(d, u, g) - 1e-9);
  }
}

TEST(GmeFreeEnergy, Identities) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [d, g] = random_gme_instance(20, 3, 2, 2, seed);
    const auto u = gme_posteriors(d, g);
    double ent = 0.0;
    for (double v : u.data()) ent += oracle::xlogx(v);
    EXPECT_NEAR(q_function(d, u, g), -j_function(d, u, g) + ent, 1e-9);
    // J at the posterior equals minus the log-likelihood
    EXPECT_NEAR(j_function(d, u, g), -gme_loglik(d, g), 1e-8 * std::abs(gme_loglik(d, g)));
    // and any other membership matrix does no better
    const auto r = fixture::random_instance(seed, 20, 3, 2, LossKind::logloss);
    EXPECT_GE(j_function(d, r.u, g), j_function(d, u, g) - 1e-9);
  }
}

TEST(GmeEquivalence, ZeroIterationsHasNoGap) {
  const auto [d, g] = random_gme_instance(30, 2, 2, 2, 1);
  const auto rep = certify_equivalence(d, g, 0);
  EXPECT_EQ(rep.max_u_gap, 0.0);
  EXPECT_EQ(rep.max_param_gap, 0.0);
  EXPECT_EQ(rep.loglik_trace.size(), 1u);
}

TEST(GmeEquivalence, RandomInstanceTracksEm) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto [d, g] = random_gme_instance(30, 2, 2, 2, seed);
    const auto rep = certify_equivalence(d, g, 10);
    EXPECT_LT(rep.max_u_gap, 1e-8);
    EXPECT_LT(rep.max_param_gap, 1e-8);
    EXPECT_LT(rep.max_sfp_form_gap, 1e-9);
    EXPECT_LE(rep.max_loglik_decrease, 1e-9 * std::abs(rep.loglik_trace.front()));
    ASSERT_EQ(rep.j_trace.size(), 10u);
    for (std::size_t t = 0; t < 10; ++t)
      EXPECT_NEAR(rep.j_trace[t], -rep.loglik_trace[t], 1e-8 * std::abs(rep.loglik_trace[t]));
  }
}

TEST(GmeEquivalence, FreeMixingAlsoTracksEm) {
  const auto [d, g] = random_gme_instance(40, 3, 2, 2, 9, 1.0, 1.0, false);
  const auto rep = certify_equivalence(d, g, 10);
  EXPECT_LT(rep.max_u_gap, 1e-8);
  EXPECT_LT(rep.max_param_gap, 1e-8);
}

TEST(GmeToSfp, SameCentersWeightsAndPrototypes) {
  const auto [d, g] = random_gme_instance(12, 3, 2, 3, 2);
  const auto m = to_sfp_params(g);
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.centers, g.means);
  EXPECT_EQ(m.weights, g.weights);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(m.prototypes[j], row_of(g.experts, j));
}

TEST(GmeParams, Validation) {
  auto [d, g] = random_gme_instance(10, 2, 2, 2, 3);
  EXPECT_NO_THROW(g.validate());
  g.weights(0, 0) = 0.0;
  g.weights(0, 1) = 1.0;
  EXPECT_THROW(g.validate(), DomainError);
  EXPECT_THROW(random_gme_instance(1, 2, 2, 2, 0), DomainError);
  EXPECT_THROW(certify_equivalence(d, random_gme_instance(10, 2, 2, 2, 3).second, -1), DomainError);
}
