#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "scolab/norm_ball.hpp"
#include "scolab/random.hpp"

namespace scolab {

/// Opaque outcome descriptor. Explicit-weight families use the index into the
/// weight vector; implicitly sampled families define their own encoding.
using Outcome = std::uint64_t;

/// An i.i.d. draw S = (z_1, ..., z_n) together with the seed that produced it.
struct Sample {
  std::vector<Outcome> outcomes;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return outcomes.size(); }
  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Multiset view of a sample: distinct outcomes (ascending) with multiplicities.
struct OutcomeCounts {
  std::vector<std::pair<Outcome, std::size_t>> entries;
  std::size_t total = 0;
};

OutcomeCounts count_outcomes(const Sample& s);

/// A finite-support stochastic convex problem over the unit ball K.
///
/// Implementations are immutable after construction and every oracle is a pure
/// function, so one instance may be shared by concurrent workers.
class Instance {
 public:
  virtual ~Instance() = default;

  const NormBall& ball() const noexcept { return ball_; }
  /// L: every f_z is L-Lipschitz w.r.t. the ball's norm.
  double lipschitz() const noexcept { return lipschitz_; }
  /// c: sup over K and Z of |f_z|.
  double bound() const noexcept { return bound_; }
  const std::string& label() const noexcept { return label_; }

  virtual double loss(Outcome z, const Vector& x) const = 0;
  /// One element of the subdifferential of f_z at x.
  virtual Vector subgradient(Outcome z, const Vector& x) const = 0;
  /// Extreme points of the subdifferential, for piecewise-linear families.
  /// Empty when the family does not describe its subdifferentials.
  virtual std::vector<Vector> subdifferential_extremes(Outcome z, const Vector& x) const;

  bool explicit_weights() const noexcept { return !weights_.empty(); }
  std::span<const double> weights() const noexcept { return weights_; }
  /// |Z| for explicit-weight families; throws for implicit ones.
  std::size_t outcome_count() const;
  virtual bool valid_outcome(Outcome z) const { return z < weights_.size(); }
  virtual Outcome draw(Rng& rng) const;

  /// F(x) without the domain check. Exact weighted sum by default; implicit
  /// families supply a closed form.
  virtual double expected_loss(const Vector& x) const;
  /// E_z[subgradient(z, x)].
  virtual Vector expected_subgradient(const Vector& x) const;
  /// sum_z count_z f_z(x) / n over a compressed sample.
  virtual double mean_loss(const OutcomeCounts& counts, const Vector& x) const;
  /// If every f_z has the same subgradient at x (e.g. all locally constant),
  /// that vector. Lets certificates be built for implicit outcome spaces.
  virtual std::optional<Vector> common_subgradient(const Vector& x) const;

  virtual std::optional<Vector> known_minimizer() const { return std::nullopt; }
  /// Structured points worth testing as spurious near-minimizers of F-hat.
  virtual std::vector<Vector> spurious_candidates(const Sample&) const { return {}; }
  /// Closed-form argmin of F-hat over K, if the family has one.
  virtual std::optional<Vector> empirical_minimizer(const Sample&) const { return std::nullopt; }
  /// Family-specific probe points (e.g. the hidden directions of the hard family).
  virtual std::vector<Vector> structured_points() const { return {}; }

  /// Family name + parameters; enough to rebuild the instance via make_instance.
  virtual nlohmann::json descriptor() const = 0;

 protected:
  Instance(NormBall ball, double lipschitz, double bound, std::string label,
           std::vector<double> weights = {});

 private:
  NormBall ball_;
  double lipschitz_;
  double bound_;
  std::string label_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

using InstancePtr = std::shared_ptr<const Instance>;

/// F(x) = E_z f_z(x). Throws InputError when x lies outside K by more than 1e-9.
double population_loss(const Instance& inst, const Vector& x);

/// F-hat(x) = (1/n) sum_j f_{z_j}(x) with multiset semantics.
double empirical_loss(const Instance& inst, const Sample& s, const Vector& x);

/// n i.i.d. outcomes from a generator seeded with `seed`; bit-exact reproducible.
Sample draw_sample(const Instance& inst, std::size_t n, std::uint64_t seed);

/// Sample mean of the oracle subgradients at x.
Vector empirical_subgradient(const Instance& inst, const Sample& s, const Vector& x);

/// Largest violation of each family invariant over seeded probes (negative or
/// zero means satisfied).
struct InvariantReport {
  std::size_t probes = 0;
  double weight_sum_error = 0.0;
  bool weights_nonnegative = true;
  double lipschitz_excess = -1.0;   // max |f(x)-f(y)| - L ||x-y||
  double bound_excess = -1.0;       // max |f(x)| - c
  double subgradient_excess = -1.0; // max f(x) + <g, y-x> - f(y)
  double dual_norm_excess = -1.0;   // max ||g||_* - L

  bool pass(double tol = 1e-9) const;
  nlohmann::json to_json() const;
};

InvariantReport check_invariants(const Instance& inst, std::size_t probes, std::uint64_t seed);

}  // namespace scolab
