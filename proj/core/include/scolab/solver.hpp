#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "scolab/instance.hpp"

namespace scolab {

struct SolveReport {
  Vector point;
  double value = 0.0;
  double tol = 0.0;              // certified optimality gap
  std::size_t iterations = 0;
  std::string method;            // "subgradient", "closed-form" or "known"

  nlohmann::json to_json() const;
};

/// A convex objective over K given by value and subgradient oracles.
struct Objective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> subgradient;
};

struct SolveOptions {
  bool use_closed_form = true;
  /// Cap on subgradient steps; 0 means 16 * ceil((2L/tol)^2).
  std::size_t max_iterations = 0;
};

/// Projected subgradient descent from x = 0 with step R / (L sqrt(t)).
/// Returns the better of the running average and the best iterate. The gap is
/// certified by the aggregated linearization lower bound; the run stops once
/// that gap is <= tol, after at most max_iterations steps.
SolveReport minimize_convex(const NormBall& ball, double lipschitz, const Objective& f, double tol,
                            std::size_t max_iterations = 0);

/// Minimizes F-hat. A closed-form empirical minimizer, when the family has one,
/// is checked against probe points and returned instead (IntegrityError if a
/// probe beats it).
SolveReport minimize_empirical(const Instance& inst, const Sample& s, double tol,
                               const SolveOptions& opts = {});

/// Minimizes F. A known minimizer is returned after checking
/// F(known) <= F(solver) + tol (IntegrityError otherwise).
SolveReport population_minimizer(const Instance& inst, double tol, const SolveOptions& opts = {});

enum class Premise {
  AtMinimizer,     // F-hat(x) <= F-hat(x*) + eps
  AtEmpiricalMin,  // F-hat(x) <= min over candidates and ERM of F-hat + eps
};

struct NearErm {
  Vector point;
  SolveReport erm;               // the empirical minimizer used as a candidate
  double pop_excess = 0.0;       // F(point) - F(x*)
  double empirical_gap = 0.0;    // F-hat(point) - F-hat(x*)
  std::size_t index = 0;         // position in the candidate list
  std::size_t candidates = 0;
  std::size_t qualifying = 0;

  nlohmann::json to_json() const;
};

/// Net points, spurious candidates of the sample, the empirical minimizer and
/// x*, in that order.
std::vector<Vector> near_erm_candidates(const Instance& inst, const Sample& s,
                                        std::span<const Vector> net_points, const Vector& erm,
                                        const Vector& xstar);

/// Candidates in order: net points, spurious candidates of the sample, the
/// empirical minimizer, x*. Returns the candidate with the largest F among
/// those satisfying the premise; ties go to the lowest index.
NearErm worst_near_erm(const Instance& inst, const Sample& s, double eps,
                       std::span<const Vector> net_points, const SolveReport& population,
                       double tol, Premise premise = Premise::AtMinimizer);

}  // namespace scolab
