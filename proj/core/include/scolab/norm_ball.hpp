#pragma once

#include <string>
#include <string_view>

#include <Eigen/Core>

#include "scolab/random.hpp"

namespace scolab {

using Vector = Eigen::VectorXd;

enum class NormFamily { L1, L2, Linf, Lp };

/// Unit ball K of an l_p norm on R^d. Exponents 1, 2 and infinity are always
/// stored under their dedicated family so exact algorithms are selected.
class NormBall {
 public:
  static NormBall l1(int dim);
  static NormBall l2(int dim);
  static NormBall linf(int dim);
  /// General exponent p >= 1 (p may be +infinity).
  static NormBall lp(double p, int dim);
  /// Accepts "l1", "l2", "linf" or "lp" (with exponent p).
  static NormBall parse(std::string_view family, int dim, double p = 2.0);

  NormFamily family() const noexcept { return family_; }
  int dim() const noexcept { return dim_; }
  double exponent() const noexcept { return p_; }
  /// q with 1/p + 1/q = 1 (1/inf = 0).
  double dual_exponent() const noexcept;
  /// "l1", "l2", "linf" or "lp<p>".
  std::string name() const;

  friend bool operator==(const NormBall&, const NormBall&) = default;

 private:
  NormBall(NormFamily family, double p, int dim) : family_(family), p_(p), dim_(dim) {}

  NormFamily family_;
  double p_;
  int dim_;
};

/// ||x|| for the ball's norm.
double norm_eval(const NormBall& ball, const Vector& x);

/// ||g||_* = sup_{x in K} <g, x>, the l_q norm of g.
double dual_norm_eval(const NormBall& ball, const Vector& g);

/// Euclidean projection onto K. Exact for p in {1, 2, inf}; throws
/// UnsupportedError for other exponents.
Vector project(const NormBall& ball, const Vector& x);

struct LinearMinimum {
  Vector point;
  double value;
};

/// argmin_{x in K} <g, x>; value is always -||g||_*. Ties resolve to the lowest
/// coordinate, and g = 0 yields the origin.
LinearMinimum linear_minimize(const NormBall& ball, const Vector& g);

bool contains(const NormBall& ball, const Vector& x, double tol = 1e-12);

/// Uniform draw from K (rejection from the cube for general p).
Vector sample_uniform(const NormBall& ball, Rng& rng);

/// Largest Euclidean norm of a point of K.
double euclidean_radius(const NormBall& ball);

/// sup_{x in K} ||x||_*; e.g. d for the l_inf ball.
double dual_radius(const NormBall& ball);

}  // namespace scolab
