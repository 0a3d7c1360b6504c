#include <gtest/gtest.h>

#include <cmath>

#include "scolab/divergence.hpp"
#include "scolab/errors.hpp"
#include "scolab/families.hpp"
#include "scolab/net.hpp"
#include "support.hpp"

using namespace scolab;
using scolab::test::vec;

namespace {

InstancePtr quad_pm1() { return make_quadratic_instance({vec({-1}), vec({1})}, NormBall::l2(1)); }

double coin_mean(const Sample& s) {
  double m = 0.0;
  for (Outcome z : s.outcomes) m += z == 0 ? 1.0 : -1.0;
  return m / static_cast<double>(s.size());
}

}  // namespace

TEST(Certificate, QuadraticGradients) {
  const InstancePtr q = quad_pm1();
  const OptimalityCertificate cert = build_certificate(*q, vec({0}));
  EXPECT_EQ(cert.strategy, "gradient");
  EXPECT_NEAR(cert.g(0)[0], 0.5, 1e-15);   // center -1: (0 - (-1)) / 2
  EXPECT_NEAR(cert.g(1)[0], -0.5, 1e-15);
  EXPECT_EQ(cert.G[0], 0.0);
  EXPECT_EQ(cert.violation, 0.0);
}

TEST(Certificate, CoinPicksZInsideInterval) {
  const InstancePtr coin = make_coin_instance(0.1);
  const OptimalityCertificate cert = build_certificate(*coin, vec({0}));
  EXPECT_NEAR(cert.g(0)[0], 1.0, 1e-12);
  EXPECT_NEAR(cert.g(1)[0], -1.0, 1e-12);
  EXPECT_NEAR(cert.G[0], 0.0, 1e-12);
  EXPECT_LE(cert.violation, 1e-8);
}

TEST(Certificate, HardFamilyIsZero) {
  const InstancePtr h = make_hard_instance(8, 0.25, 4, 3);
  const OptimalityCertificate cert = build_certificate(*h, Vector::Zero(8));
  EXPECT_EQ(cert.strategy, "common");
  EXPECT_EQ(*cert.common_g, Vector::Zero(8));
  EXPECT_EQ(cert.g(12345), Vector::Zero(8));
  EXPECT_EQ(cert.violation, 0.0);
}

TEST(Certificate, AppendixDecomposition) {
  const InstancePtr a = make_appendix_pair().as_instance();
  const OptimalityCertificate cert = build_certificate(*a, vec({-0.1}));
  EXPECT_EQ(cert.strategy, "tie-weights");
  EXPECT_LE(cert.violation, 1e-8);
  // outcomes carry 2 f1 and 2 f2, so halve to read off f-level subgradients
  const double g1 = cert.g(0)[0] / 2, g2 = cert.g(1)[0] / 2;
  EXPECT_NEAR(g1, -0.4, 1e-12);
  EXPECT_NEAR(g2, 0.4, 1e-6);
  EXPECT_NEAR(g1 + g2, 0.0, 1e-6);
  EXPECT_LE(std::abs(g2), 1.0);
}

TEST(Certificate, Invariants) {
  std::vector<std::pair<InstancePtr, Vector>> cases = {
      {quad_pm1(), vec({0})},
      {make_coin_instance(0.3), vec({0})},
      {make_appendix_pair().as_instance(), vec({-0.1})},
      {make_quadratic_instance({vec({0.3, 0.5}), vec({-1, 2}), vec({0.1, -0.4})}, NormBall::linf(2)),
       Vector()}};
  cases.back().second = *cases.back().first->known_minimizer();
  Rng rng(5);
  for (const auto& [inst, xs] : cases) {
    const OptimalityCertificate cert = build_certificate(*inst, xs);
    Vector G = Vector::Zero(xs.size());
    for (std::size_t z = 0; z < inst->outcome_count(); ++z) {
      const Vector& g = cert.g(z);
      G += inst->weights()[z] * g;
      EXPECT_LE(dual_norm_eval(inst->ball(), g), inst->lipschitz() + 1e-9);
      for (int k = 0; k < 1000; ++k) {
        const Vector y = sample_uniform(inst->ball(), rng);
        EXPECT_GE(inst->loss(z, y), inst->loss(z, xs) + g.dot(y - xs) - 1e-9);
      }
    }
    EXPECT_LE((G - cert.G).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LE(cert.violation, 1e-8);
    EXPECT_NEAR(cert.violation, certificate_violation(inst->ball(), cert.G, xs), 1e-15);
  }
}

TEST(Certificate, Errors) {
  const InstancePtr q = quad_pm1();
  EXPECT_THROW(build_certificate(*q, vec({0.5})), InputError);  // not a minimizer
  EXPECT_THROW(build_certificate(*q, vec({2})), InputError);
  EXPECT_THROW(build_certificate(*q, vec({0, 0})), InputError);
}

TEST(Certificate, ViolationCarriesDirection) {
  // f(x) = |x| + x/2 is minimized at 0, but its oracle subgradient there is
  // 1.5 and no extremes are declared, so nothing can balance it.
  FiniteSpec spec;
  spec.outcomes = {FiniteOutcome{"|x|+x/2", [](const Vector& x) { return std::abs(x[0]) + 0.5 * x[0]; },
                                 [](const Vector& x) { return vec({(x[0] >= 0 ? 1.0 : -1.0) + 0.5}); },
                                 {}}};
  spec.weights = {1.0};
  spec.bound = 1.5;
  spec.lipschitz = 1.5;
  const InstancePtr inst = make_finite_instance(spec);
  try {
    build_certificate(*inst, vec({0}));
    FAIL() << "expected a certificate error";
  } catch (const CertificateError& e) {
    EXPECT_EQ(e.direction(), vec({-1}));
    EXPECT_NEAR(e.violation(), 1.5, 1e-15);
  }
}

TEST(Bregman, Examples) {
  const InstancePtr q = quad_pm1();
  const OptimalityCertificate qc = build_certificate(*q, vec({0}));
  const InstancePtr coin = make_coin_instance(0.1);
  const OptimalityCertificate cc = build_certificate(*coin, vec({0}));
  for (double x : {-1.0, -0.4, 0.0, 0.25, 1.0}) {
    EXPECT_NEAR(bregman(qc, *q, vec({x})), x * x / 4, 1e-15);
    EXPECT_NEAR(bregman(cc, *coin, vec({x})), 0.2 * std::abs(x), 1e-12);
  }
  EXPECT_EQ(bregman(qc, *q, vec({0})), 0.0);
}

TEST(EmpiricalBregman, CoinSampleDependenceCancels) {
  const InstancePtr coin = make_coin_instance(0.1);
  const OptimalityCertificate cert = build_certificate(*coin, vec({0}));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Sample s = draw_sample(*coin, 1 + seed * 3, seed);
    for (double x : {-1.0, -0.3, 0.6})
      EXPECT_NEAR(empirical_bregman(cert, *coin, s, vec({x})), 0.2 * std::abs(x), 1e-12);
  }
}

TEST(EmpiricalBregman, SingleOutcomeAndExactExpectation) {
  const InstancePtr q =
      make_quadratic_instance({vec({0.5, 0}), vec({-0.5, 0.5}), vec({0, -0.5})}, NormBall::l2(2));
  const Vector xs = *q->known_minimizer();
  const OptimalityCertificate cert = build_certificate(*q, xs);
  Rng rng(6);
  for (int k = 0; k < 100; ++k) {
    const Vector x = sample_uniform(q->ball(), rng);
    double weighted = 0.0;
    for (Outcome z = 0; z < 3; ++z) {
      const double dz = q->loss(z, x) - q->loss(z, xs) - cert.g(z).dot(x - xs);
      EXPECT_NEAR(empirical_bregman(cert, *q, Sample{{z}, 0}, x), dz, 1e-12);
      EXPECT_GE(dz, -1e-12);
      weighted += q->weights()[z] * dz;
    }
    EXPECT_NEAR(bregman(cert, *q, x), weighted, 1e-12);
    EXPECT_NEAR(empirical_bregman(cert, *q, Sample{{0, 1, 2}, 0}, x), bregman(cert, *q, x), 1e-12);
  }
}

TEST(Divergences, NonnegativeOnNet) {
  std::vector<std::pair<InstancePtr, Vector>> cases = {
      {quad_pm1(), vec({0})},
      {make_coin_instance(0.2), vec({0})},
      {make_appendix_pair().as_instance(), vec({-0.1})}};
  for (const auto& [inst, xs] : cases) {
    const OptimalityCertificate cert = build_certificate(*inst, xs);
    const Net net = build_net(inst->ball(), 0.05, 1000, 1);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Sample s = draw_sample(*inst, 7, seed);
      for (const Vector& x : net.points) {
        EXPECT_GE(bregman(cert, *inst, x), -1e-9);
        EXPECT_GE(empirical_bregman(cert, *inst, s, x), -1e-9);
        const Truncated t = truncated_divergence(cert, *inst, s, x, inst->bound());
        EXPECT_GE(t.T, -1e-9);
        EXPECT_LE(t.T, 4 * inst->bound() + 1e-9);
        EXPECT_GE(t.That, -1e-9);
        EXPECT_LE(t.That, 4 * inst->bound() + 1e-9);
      }
    }
  }
}

TEST(Truncated, EqualsBregmanWhenInactive) {
  const InstancePtr q = quad_pm1();
  const OptimalityCertificate cert = build_certificate(*q, vec({0}));
  const Sample s{{0, 0, 1}, 0};
  for (double x : {-1.0, 0.3, 1.0}) {
    const Truncated t = truncated_divergence(cert, *q, s, vec({x}), q->bound());
    EXPECT_FALSE(t.active);
    EXPECT_NEAR(t.T, bregman(cert, *q, vec({x})), 1e-15);
    EXPECT_NEAR(t.That, empirical_bregman(cert, *q, s, vec({x})), 1e-15);
  }
}

TEST(Truncated, ClipsLargeNegativeLinearTerm) {
  // F = 0.75 x - 0.75 x is flat, so x* = 1 works with G = 0. A small c passed
  // in makes the first outcome's <g, x - x*> = -1 fall below -2c = -0.5.
  FiniteSpec spec;
  spec.outcomes = {FiniteOutcome{"x", [](const Vector& x) { return x[0]; },
                                 [](const Vector&) { return vec({1}); }, {}},
                   FiniteOutcome{"-3x", [](const Vector& x) { return -3 * x[0]; },
                                 [](const Vector&) { return vec({-3}); }, {}}};
  spec.weights = {0.75, 0.25};
  spec.lipschitz = 3.0;
  spec.bound = 3.0;
  const InstancePtr inst = make_finite_instance(spec);
  const OptimalityCertificate cert = build_certificate(*inst, vec({1}));
  EXPECT_EQ(cert.violation, 0.0);
  const Truncated t = truncated_divergence(cert, *inst, Sample{{0}, 0}, vec({0}), 0.25);
  EXPECT_TRUE(t.active);
  EXPECT_NEAR(t.That, -1.0 + 0.5, 1e-15);
  EXPECT_NEAR(t.T, 0.75 * (-0.5) + 0.25 * (3.0 - 3.0), 1e-15);
  EXPECT_FALSE(truncated_divergence(cert, *inst, Sample{{0}, 0}, vec({0}), 3.0).active);
}

TEST(Truncated, HardFamilyAtE1) {
  const double eps0 = 0.5;
  const InstancePtr h = make_hard_instance({vec({1, 0}), vec({0, 1})}, eps0);
  const OptimalityCertificate cert = build_certificate(*h, vec({0, 0}));
  EXPECT_NEAR(truncated_divergence(cert, *h, Sample{{0}, 0}, vec({1, 0}), 1.0).T, eps0 / 2, 1e-15);
  for (Outcome z = 0; z < 4; ++z) {
    const Truncated t = truncated_divergence(cert, *h, Sample{{z}, 0}, vec({1, 0}), 1.0);
    EXPECT_EQ(t.That, (z & 1) ? 0.5 : 0.0);
  }
}

TEST(Representativeness, Examples) {
  const InstancePtr coin = make_coin_instance(0.1);
  const OptimalityCertificate cert = build_certificate(*coin, vec({0}));
  const Net net = build_net(coin->ball(), 0.05, 1000, 0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Sample s = draw_sample(*coin, 9, seed);
    const std::vector<Vector> ends = {vec({-1}), vec({1})};
    EXPECT_NEAR(representativeness(cert, *coin, s, ends, coin->bound()).value,
                std::abs(coin_mean(s)), 1e-12);
    EXPECT_LE(representativeness(cert, *coin, s, net.points, coin->bound()).value,
              std::abs(coin_mean(s)) + 1e-12);
  }
  // exact-expectation sample
  EXPECT_NEAR(representativeness(cert, *coin, Sample{{0, 1}, 0}, net.points, coin->bound()).value, 0.0,
              1e-12);
  // single outcome: L = L-hat
  FiniteSpec spec;
  spec.outcomes = {FiniteOutcome{"x^2", [](const Vector& x) { return x[0] * x[0]; },
                                 [](const Vector& x) { return vec({2 * x[0]}); }, {}}};
  spec.weights = {1.0};
  spec.lipschitz = 2.0;
  const InstancePtr one = make_finite_instance(spec);
  const OptimalityCertificate oc = build_certificate(*one, vec({0}));
  EXPECT_EQ(representativeness(oc, *one, Sample{{0, 0}, 0}, net.points, 1.0).value, 0.0);
}

TEST(DivergenceReport, FieldsAndJson) {
  const InstancePtr coin = make_coin_instance(0.1);
  const OptimalityCertificate cert = build_certificate(*coin, vec({0}));
  const Sample s = draw_sample(*coin, 10, 3);
  const std::vector<Vector> pts = {vec({-1}), vec({1})};
  const DivergenceReport r = divergence_report(cert, *coin, s, vec({0.5}), pts);
  EXPECT_NEAR(r.D, 0.1, 1e-12);
  EXPECT_NEAR(r.Dhat, 0.1, 1e-12);
  EXPECT_NEAR(r.T, 0.1, 1e-12);
  EXPECT_NEAR(r.Rep, std::abs(coin_mean(s)), 1e-12);
  const auto j = r.to_json();
  EXPECT_EQ(j.at("sample").at("seed"), 3);
  EXPECT_TRUE(j.at("rep_net_restricted").get<bool>());
  EXPECT_EQ(j.at("certificate").at("strategy"), "tie-weights");
}
