#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "scolab/errors.hpp"
#include "scolab/families.hpp"
#include "support.hpp"

using namespace scolab;
using scolab::test::vec;

namespace {

InstancePtr hard_e1e2(double eps0) {
  return make_hard_instance({vec({1, 0}), vec({0, 1})}, eps0);
}

// Brute-force F for the hard family: every subset of V weighted by its probability.
double hard_loss_oracle(const Instance& inst, const std::vector<Vector>& V, double eps0,
                        const Vector& x) {
  const std::size_t m = V.size();
  double acc = 0.0;
  for (Outcome mask = 0; mask < (Outcome{1} << m); ++mask) {
    const int k = std::popcount(mask);
    acc += std::pow(eps0, k) * std::pow(1.0 - eps0, static_cast<double>(m) - k) * inst.loss(mask, x);
  }
  return acc;
}

Vector hard_subgradient_oracle(const Instance& inst, double eps0, std::size_t m, const Vector& x) {
  Vector acc = Vector::Zero(x.size());
  for (Outcome mask = 0; mask < (Outcome{1} << m); ++mask) {
    const int k = std::popcount(mask);
    acc += std::pow(eps0, k) * std::pow(1.0 - eps0, static_cast<double>(m) - k) *
           inst.subgradient(mask, x);
  }
  return acc;
}

}  // namespace

TEST(Coin, Examples) {
  const InstancePtr coin = make_coin_instance(0.1);
  EXPECT_NEAR(population_loss(*coin, vec({0.5})), 0.1, 1e-15);
  EXPECT_NEAR(population_loss(*coin, vec({1})), 0.2, 1e-15);
  EXPECT_EQ(population_loss(*coin, vec({0})), 0.0);
  EXPECT_NEAR(coin->lipschitz(), 1.2, 1e-15);
  EXPECT_NEAR(coin->bound(), 1.2, 1e-15);
  EXPECT_EQ(*coin->known_minimizer(), vec({0}));
}

TEST(Coin, EmpiricalAllHeads) {
  const InstancePtr coin = make_coin_instance(0.1);
  Sample s{std::vector<Outcome>(7, 0), 0};
  EXPECT_NEAR(empirical_loss(*coin, s, vec({-1})), -0.8, 1e-15);
  EXPECT_NEAR(empirical_loss(*coin, s, vec({0.3})), 0.06 + 0.3, 1e-15);
}

TEST(Coin, SpuriousCandidateAndEmpiricalMinimizer) {
  const InstancePtr coin = make_coin_instance(0.1);
  // three +1 and one -1: mean 0.5
  Sample s{{0, 0, 0, 1}, 0};
  ASSERT_EQ(coin->spurious_candidates(s).size(), 1u);
  EXPECT_EQ(coin->spurious_candidates(s)[0], vec({-1}));
  EXPECT_EQ(*coin->empirical_minimizer(s), vec({-1}));
  EXPECT_NEAR(empirical_loss(*coin, s, vec({-1})), -0.3, 1e-15);
  Sample balanced{{0, 1}, 0};
  EXPECT_TRUE(coin->spurious_candidates(balanced).empty());
  EXPECT_EQ(*coin->empirical_minimizer(balanced), vec({0}));
}

TEST(Coin, SampleMeanConcentrates) {
  const InstancePtr coin = make_coin_instance(0.1);
  const std::size_t n = 10000;
  const Sample s = draw_sample(*coin, n, 42);
  double mean = 0.0;
  for (Outcome z : s.outcomes) mean += z == 0 ? 1.0 : -1.0;
  mean /= n;
  EXPECT_LE(std::abs(mean), 4.0 / std::sqrt(double(n)));
}

TEST(Sample, DeterministicAndValid) {
  for (const InstancePtr& inst : {make_coin_instance(0.2), hard_e1e2(0.3),
                                  make_hard_instance(8, 0.25, 4, 5)}) {
    const Sample a = draw_sample(*inst, 500, 17);
    const Sample b = draw_sample(*inst, 500, 17);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.seed, 17u);
    for (Outcome z : a.outcomes) EXPECT_TRUE(inst->valid_outcome(z));
    EXPECT_NE(a, draw_sample(*inst, 500, 18));
  }
}

TEST(Sample, PointMassWeights) {
  FiniteSpec spec;
  spec.outcomes = {FiniteOutcome{"a", [](const Vector& x) { return x[0]; },
                                 [](const Vector&) { return vec({1}); }, {}},
                   FiniteOutcome{"b", [](const Vector& x) { return -x[0]; },
                                 [](const Vector&) { return vec({-1}); }, {}}};
  spec.weights = {0.0, 1.0};
  const InstancePtr inst = make_finite_instance(spec);
  const Sample s = draw_sample(*inst, 200, 3);
  for (Outcome z : s.outcomes) EXPECT_EQ(z, 1u);
  EXPECT_EQ(population_loss(*inst, vec({0.4})), -0.4);
}

TEST(Hard, TwoDirectionExamples) {
  const InstancePtr h = hard_e1e2(0.5);
  EXPECT_NEAR(population_loss(*h, vec({1, 0})), 0.75, 1e-15);
  EXPECT_NEAR(population_loss(*h, vec({0, 0})), 0.5, 1e-15);
  EXPECT_EQ(h->lipschitz(), 1.0);
  EXPECT_EQ(h->bound(), 1.0);
  for (const Vector& x : {vec({1, 0}), vec({0, -1}), vec({0.6, 0.8})}) EXPECT_EQ(h->loss(0, x), 0.5);
  // D_z(e1, 0) = f_z(e1) - 1/2 is 1/2 exactly when e1 is in z.
  for (Outcome z = 0; z < 4; ++z)
    EXPECT_EQ(h->loss(z, vec({1, 0})) - 0.5, (z & 1) ? 0.5 : 0.0);
}

TEST(Hard, ClosedFormMatchesEnumeration) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 6 + trial % 5;
    const int m = 2 + trial % 6;
    const double eps0 = 0.05 + 0.45 * uniform01(rng);
    const InstancePtr h = make_hard_instance(d, eps0, m, 100 + trial);
    const std::vector<Vector> V = h->structured_points();
    ASSERT_EQ(V.size(), static_cast<std::size_t>(m));
    for (int k = 0; k < 10; ++k) {
      Vector x = sample_uniform(h->ball(), rng);
      if (k < m) x = V[k] * (0.5 + 0.5 * uniform01(rng));
      EXPECT_NEAR(population_loss(*h, x), hard_loss_oracle(*h, V, eps0, x), 1e-12);
      EXPECT_LE((h->expected_subgradient(x) - hard_subgradient_oracle(*h, eps0, m, x)).norm(), 1e-12);
    }
  }
}

TEST(Hard, DirectionsAreSeparatedUnitVectors) {
  const InstancePtr h = make_hard_instance(16, 0.25, 16, 9);
  const std::vector<Vector> V = h->structured_points();
  for (std::size_t i = 0; i < V.size(); ++i) {
    EXPECT_NEAR(V[i].norm(), 1.0, 1e-14);
    for (std::size_t j = i + 1; j < V.size(); ++j) EXPECT_LE(V[i].dot(V[j]), 0.5 + 1e-12);
  }
}

TEST(Hard, SpuriousCandidatesAreUnseenDirections) {
  const InstancePtr h = hard_e1e2(0.5);
  Sample s{{0, 2, 0}, 0};  // only e2 ever activated
  const auto cands = h->spurious_candidates(s);
  ASSERT_EQ(cands.size(), 1u);
  EXPECT_EQ(cands[0], vec({1, 0}));
  EXPECT_EQ(empirical_loss(*h, s, cands[0]), 0.5);
  EXPECT_NEAR(population_loss(*h, cands[0]) - 0.5, 0.25, 1e-15);
}

TEST(Hard, Errors) {
  EXPECT_THROW(make_hard_instance(1, 0.25, 2, 0), InputError);
  EXPECT_THROW(make_hard_instance(4, 0.75, 2, 0), InputError);
  EXPECT_THROW(make_hard_instance(2, 0.25, 40, 0), CapacityError);
  EXPECT_THROW(make_hard_instance(8, 0.25, 65, 0), Error);
  EXPECT_THROW(make_hard_instance({vec({1, 0}), vec({1, 0})}, 0.25), InputError);
}

TEST(Quadratic, Examples) {
  const InstancePtr q = make_quadratic_instance({vec({-1}), vec({1})}, NormBall::l2(1));
  for (double x : {-1.0, -0.3, 0.0, 0.7, 1.0})
    EXPECT_NEAR(population_loss(*q, vec({x})), (x * x + 1) / 4, 1e-15);
  EXPECT_EQ(*q->known_minimizer(), vec({0}));
  const InstancePtr single = make_quadratic_instance({vec({0.5})}, NormBall::l2(1));
  EXPECT_EQ(*single->known_minimizer(), vec({0.5}));
  EXPECT_EQ(population_loss(*single, vec({0.5})), 0.0);
}

TEST(Quadratic, FarCentroidIsProjected) {
  const InstancePtr q = make_quadratic_instance({vec({2, 0}), vec({2, 1})}, NormBall::l1(2));
  const Vector xs = *q->known_minimizer();
  EXPECT_NEAR(xs[0], 1.0, 1e-12);
  EXPECT_NEAR(xs[1], 0.0, 1e-12);
}

TEST(Appendix, Examples) {
  EXPECT_NEAR(AppendixPair::f1(0.1), -1.0 / 25, 1e-15);
  EXPECT_NEAR(AppendixPair::f1_derivative(-0.1), -0.4, 1e-15);
  EXPECT_EQ(AppendixPair::f2_subgradient_extremes(-0.1), (std::vector<double>{-1.0, 1.0}));
  // one-sided derivatives of f1 + f2 at -0.1
  const double left = AppendixPair::f1_derivative(-0.1) - 1.0;
  const double right = AppendixPair::f1_derivative(-0.1) + 1.0;
  EXPECT_NEAR(left, -1.4, 1e-15);
  EXPECT_NEAR(right, 0.6, 1e-15);
  const InstancePtr inst = make_appendix_pair().as_instance();
  const double fmin = population_loss(*inst, vec({-0.1}));
  for (int k = 0; k <= 2000; ++k) {
    const double x = -1.0 + k / 1000.0;
    EXPECT_GE(population_loss(*inst, vec({x})), fmin - 1e-15);
    EXPECT_NEAR(population_loss(*inst, vec({x})), AppendixPair::f1(x) + AppendixPair::f2(x), 1e-14);
  }
}

TEST(PopulationLoss, RejectsPointsOutsideBall) {
  const InstancePtr coin = make_coin_instance(0.1);
  EXPECT_THROW(population_loss(*coin, vec({1.001})), InputError);
  EXPECT_THROW(population_loss(*coin, vec({0.1, 0.1})), InputError);
  EXPECT_NO_THROW(population_loss(*coin, vec({1.0 + 1e-10})));
}

TEST(PopulationLoss, LinearInWeights) {
  const InstancePtr q = make_quadratic_instance({vec({0.2, 0.1}), vec({-0.5, 0.3}), vec({0, 1})},
                                                NormBall::linf(2));
  Rng rng(9);
  for (int k = 0; k < 100; ++k) {
    const Vector x = sample_uniform(q->ball(), rng);
    double acc = 0.0;
    for (std::size_t z = 0; z < 3; ++z) acc += q->weights()[z] * q->loss(z, x);
    EXPECT_NEAR(population_loss(*q, x), acc, 1e-15);
    Sample full{{0, 1, 2}, 0};
    EXPECT_NEAR(empirical_loss(*q, full, x), population_loss(*q, x), 1e-12);
  }
}

TEST(Invariants, AllFamiliesPass) {
  std::vector<InstancePtr> families = {
      make_coin_instance(0.1),
      make_coin_instance(0.45),
      hard_e1e2(0.5),
      make_hard_instance(8, 0.25, 4, 1),
      make_quadratic_instance({vec({-1}), vec({1})}, NormBall::l2(1)),
      make_quadratic_instance({vec({1, 1}), vec({-0.5, 0.2})}, NormBall::linf(2)),
      make_quadratic_instance({vec({0.3, -2, 0})}, NormBall::l1(3)),
      make_appendix_pair().as_instance()};
  for (const InstancePtr& inst : families) {
    const InvariantReport r = check_invariants(*inst, 1000, 77);
    EXPECT_TRUE(r.pass()) << inst->label() << " " << r.to_json().dump();
    EXPECT_EQ(r.probes, 1000u);
  }
}

TEST(Invariants, DetectsUnderstatedLipschitz) {
  FiniteSpec spec;
  spec.outcomes = {FiniteOutcome{"3x", [](const Vector& x) { return 3 * x[0]; },
                                 [](const Vector&) { return vec({3}); }, {}}};
  spec.weights = {1.0};
  spec.lipschitz = 1.0;
  spec.bound = 3.0;
  EXPECT_FALSE(check_invariants(*make_finite_instance(spec), 200, 1).pass());
}

TEST(Descriptor, RoundTripAndUnknownKeys) {
  const InstancePtr h = make_hard_instance(6, 0.2, 3, 11);
  const InstancePtr back = make_instance(h->descriptor());
  EXPECT_EQ(back->structured_points(), h->structured_points());
  const InstancePtr q = make_quadratic_instance({vec({0.1, 0.2})}, NormBall::l1(2));
  EXPECT_EQ(make_instance(q->descriptor())->descriptor(), q->descriptor());
  EXPECT_EQ(make_instance({{"family", "coin"}, {"eps0", 0.1}})->label(), make_coin_instance(0.1)->label());
  EXPECT_THROW(make_instance({{"family", "coin"}, {"eps0", 0.1}, {"bias", 1}}), ConfigError);
  EXPECT_THROW(make_instance({{"family", "dice"}}), ConfigError);
  EXPECT_THROW(make_instance({{"family", "coin"}}), ConfigError);
}
