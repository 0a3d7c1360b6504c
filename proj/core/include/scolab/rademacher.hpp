#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "scolab/norm_ball.hpp"

namespace scolab {

inline constexpr std::size_t kMaxExactRademacher = 20;

/// Rad(K, S) = E_sigma || (1/n) sum_j sigma_j g_j ||_* for data S in the dual ball.
struct RadEstimate {
  double value = 0.0;
  double stderr = 0.0;  // 0 for exact and closed-form values
  std::size_t n = 0;
  std::string method;   // "exact", "monte-carlo" or "closed-form"

  nlohmann::json to_json() const;
};

/// Enumerates all sign patterns (n <= 20). The result does not depend on `jobs`.
RadEstimate rad_exact(const NormBall& ball, std::span<const Vector> S, unsigned jobs = 1);

/// Seeded sign sampling with trials >= 1000. The result does not depend on `jobs`.
RadEstimate rad_mc(const NormBall& ball, std::span<const Vector> S, std::size_t trials,
                   std::uint64_t seed, unsigned jobs = 1);

/// Upper bound on sup_S Rad(K, S) over n points of the dual ball:
/// l2: 1/sqrt(n); l1: sqrt(2 ln(2d) / n); linf: sqrt(d / n).
double rad_upper_bound(const NormBall& ball, std::size_t n);

/// Smallest n with rad_upper_bound(ball, n) < eps, for eps in (0, 1].
std::size_t rad_inverse(const NormBall& ball, double eps);

struct MonotonicityReport {
  std::size_t n = 0;    // the subsets have n points, S has n + 1
  double full = 0.0;    // Rad(K, S)
  double leave_one_out = 0.0;  // mean over j of Rad(K, S without g_j)
  bool pass = false;    // full <= leave_one_out + 1e-12

  nlohmann::json to_json() const;
};

/// Exact check of Rad(K, S) <= mean_j Rad(K, S \ {g_j}) for |S| = n + 1 <= 13.
MonotonicityReport check_monotonicity(const NormBall& ball, std::span<const Vector> S);

}  // namespace scolab
