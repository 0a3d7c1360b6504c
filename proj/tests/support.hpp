#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "scolab/norm_ball.hpp"
#include "scolab/random.hpp"

namespace scolab::test {

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// Gaussian vector scaled by a random factor in [0, scale).
inline Vector random_vector(Rng& rng, int d, double scale) {
  std::normal_distribution<double> normal;
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = normal(rng);
  return v * (scale * uniform01(rng));
}

/// Exact Pr[Binomial(n, p) <= k], summed in log space.
inline double binomial_cdf(int n, double p, int k) {
  double total = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                            i * std::log(p) + (n - i) * std::log1p(-p);
    total += std::exp(log_term);
  }
  return total;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("scolab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<NormBall> supported_balls(int d) {
  return {NormBall::l1(d), NormBall::l2(d), NormBall::linf(d)};
}

}  // namespace scolab::test
