#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scolab/instance.hpp"

namespace scolab {

inline constexpr int kMaxHardVectors = 64;

/// d = 1, K = [-1, 1], z uniform on {+1, -1}, f_z(x) = 2 eps0 |x| + z x.
/// Outcome 0 is z = +1 and outcome 1 is z = -1.
InstancePtr make_coin_instance(double eps0);

/// Hidden-direction family on the Euclidean ball: m unit vectors V with pairwise
/// inner products <= 1/2, each included in a draw z independently with
/// probability eps0, f_z(x) = max({1/2} u {<v, x> : v in z}). Outcomes are
/// bitmasks over V. Vectors are normalized random sign vectors found by seeded
/// rejection sampling.
InstancePtr make_hard_instance(int d, double eps0, int m, std::uint64_t seed,
                               int max_vectors = kMaxHardVectors);

/// Same family with caller-supplied directions (unit l2 norm, pairwise <= 1/2).
InstancePtr make_hard_instance(std::vector<Vector> directions, double eps0);

/// f_z(x) = ||x - z||_2^2 / 4 with uniform weights over `centers`.
InstancePtr make_quadratic_instance(std::vector<Vector> centers, const NormBall& ball);

/// One outcome of a hand-built finite instance.
struct FiniteOutcome {
  std::string name;
  std::function<double(const Vector&)> loss;
  std::function<Vector(const Vector&)> subgradient;
  std::function<std::vector<Vector>(const Vector&)> extremes;  // optional
};

struct FiniteSpec {
  NormBall ball = NormBall::l2(1);
  std::vector<FiniteOutcome> outcomes;
  std::vector<double> weights;
  double lipschitz = 1.0;
  double bound = 1.0;
  std::optional<Vector> known_minimizer;
  std::string label = "finite";
  nlohmann::json descriptor = nlohmann::json::object();
};

InstancePtr make_finite_instance(FiniteSpec spec);

/// The two 1-d functions f1(x) = (x - 0.1)^2 - 1/25 and f2(x) = |x + 0.1| on
/// [-1, 1], whose sum is minimized at x = -0.1.
struct AppendixPair {
  NormBall domain = NormBall::l2(1);

  static double f1(double x) { return (x - 0.1) * (x - 0.1) - 1.0 / 25.0; }
  static double f1_derivative(double x) { return 2.0 * (x - 0.1); }
  static double f2(double x) { return x + 0.1 >= 0.0 ? x + 0.1 : -(x + 0.1); }
  /// Endpoints of the subdifferential interval of f2 at x.
  static std::vector<double> f2_subgradient_extremes(double x);

  /// Two equally weighted outcomes with losses 2 f1 and 2 f2, so F = f1 + f2.
  /// Outcome 0 is f1, outcome 1 is f2.
  InstancePtr as_instance() const;
};

AppendixPair make_appendix_pair();

/// Rebuilds an instance from its descriptor. Unknown keys raise ConfigError.
///   {"family": "coin", "eps0": e}
///   {"family": "hard", "d": d, "eps0": e, "m": m, "seed": s}
///   {"family": "hard", "eps0": e, "directions": [[...], ...]}
///   {"family": "quadratic", "ball": "l2", "dim": d, "centers": [[...], ...]}
///   {"family": "appendix"}
InstancePtr make_instance(const nlohmann::json& descriptor);

}  // namespace scolab
