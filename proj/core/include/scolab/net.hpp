#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "scolab/norm_ball.hpp"

namespace scolab {

inline constexpr double kDefaultNetSizeCap = 1e5;
inline constexpr std::size_t kDefaultCandidateBudget = 20000;

/// A maximal eps-separated subset of K. Separation and distances are measured
/// in the ball's own norm; maximality makes it a (2 eps)-cover.
struct Net {
  NormBall ball;
  double separation;
  double cover_radius;  // declared: 2 * separation
  double measured_radius = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed;
  std::vector<Vector> points;
};

/// (2(1 + eps) / eps)^d, the volumetric bound on any eps-separated subset of K.
double packing_size_bound(int dim, double eps);

/// Greedy packing over a candidate stream: the symmetric axis grid with step
/// eps/(2 sqrt d) intersected with K, then seeded uniform draws from K, for
/// `candidate_budget` candidates in total. Refuses with CapacityError when the
/// packing bound exceeds `size_cap`.
Net build_net(const NormBall& ball, double eps,
              std::size_t candidate_budget = kDefaultCandidateBudget, std::uint64_t seed = 0,
              double size_cap = kDefaultNetSizeCap);

/// Largest distance from `probes` seeded uniform points of K to their nearest
/// net point.
double measure_cover_radius(const Net& net, std::size_t probes, std::uint64_t seed);

nlohmann::json to_json(const Net& net);
Net net_from_json(const nlohmann::json& j);

}  // namespace scolab
