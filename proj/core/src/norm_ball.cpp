#include "scolab/norm_ball.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "scolab/errors.hpp"

namespace scolab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(const NormBall& ball, const Vector& x, const char* what) {
  if (x.size() != ball.dim()) {
    std::ostringstream msg;
    msg << what << ": vector of length " << x.size() << " for a ball of dimension "
        << ball.dim();
    throw InputError(msg.str());
  }
}

// Scaled evaluation avoids overflow of |x_i|^p for large p.
double lp_norm(const Vector& x, double p) {
  if (std::isinf(p)) return x.cwiseAbs().maxCoeff();
  if (p == 1.0) return x.cwiseAbs().sum();
  if (p == 2.0) return x.norm();
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i]) / scale, p);
  return scale * std::pow(acc, 1.0 / p);
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// Sort-based projection onto the l1 ball (simplex projection of |x|).
Vector project_l1(const Vector& x) {
  if (x.cwiseAbs().sum() <= 1.0) return x;
  std::vector<double> u(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) u[i] = std::abs(x[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out[i] = sign(x[i]) * std::max(std::abs(x[i]) - theta, 0.0);
  return out;
}

}  // namespace

NormBall NormBall::l1(int dim) { return lp(1.0, dim); }
NormBall NormBall::l2(int dim) { return lp(2.0, dim); }
NormBall NormBall::linf(int dim) { return lp(kInf, dim); }

NormBall NormBall::lp(double p, int dim) {
  if (dim < 1) throw InputError("norm ball dimension must be positive");
  if (!(p >= 1.0)) throw InputError("l_p exponent must satisfy p >= 1");
  if (p == 1.0) return NormBall(NormFamily::L1, 1.0, dim);
  if (p == 2.0) return NormBall(NormFamily::L2, 2.0, dim);
  if (std::isinf(p)) return NormBall(NormFamily::Linf, kInf, dim);
  return NormBall(NormFamily::Lp, p, dim);
}

NormBall NormBall::parse(std::string_view family, int dim, double p) {
  if (family == "l1") return l1(dim);
  if (family == "l2") return l2(dim);
  if (family == "linf") return linf(dim);
  if (family == "lp") return lp(p, dim);
  throw InputError("unknown norm family '" + std::string(family) +
                   "' (expected l1, l2, linf or lp)");
}

double NormBall::dual_exponent() const noexcept {
  switch (family_) {
    case NormFamily::L1: return kInf;
    case NormFamily::L2: return 2.0;
    case NormFamily::Linf: return 1.0;
    case NormFamily::Lp: return p_ / (p_ - 1.0);
  }
  return 2.0;
}

std::string NormBall::name() const {
  switch (family_) {
    case NormFamily::L1: return "l1";
    case NormFamily::L2: return "l2";
    case NormFamily::Linf: return "linf";
    case NormFamily::Lp: {
      std::ostringstream s;
      s << "lp" << p_;
      return s.str();
    }
  }
  return "l2";
}

double norm_eval(const NormBall& ball, const Vector& x) {
  check_dim(ball, x, "norm_eval");
  return lp_norm(x, ball.exponent());
}

double dual_norm_eval(const NormBall& ball, const Vector& g) {
  check_dim(ball, g, "dual_norm_eval");
  return lp_norm(g, ball.dual_exponent());
}

Vector project(const NormBall& ball, const Vector& x) {
  check_dim(ball, x, "project");
  switch (ball.family()) {
    case NormFamily::L2: {
      const double r = x.norm();
      return r <= 1.0 ? x : Vector(x / r);
    }
    case NormFamily::Linf: return x.cwiseMax(-1.0).cwiseMin(1.0);
    case NormFamily::L1: return project_l1(x);
    case NormFamily::Lp: break;
  }
  throw UnsupportedError("Euclidean projection onto the " + ball.name() +
                         " ball is not implemented (exact only for p in {1, 2, inf})");
}

LinearMinimum linear_minimize(const NormBall& ball, const Vector& g) {
  check_dim(ball, g, "linear_minimize");
  const Eigen::Index d = g.size();
  Vector point = Vector::Zero(d);
  if (g.cwiseAbs().maxCoeff() == 0.0) return {point, 0.0};
  switch (ball.family()) {
    case NormFamily::L2: point = -g / g.norm(); break;
    case NormFamily::Linf:
      for (Eigen::Index i = 0; i < d; ++i) point[i] = -sign(g[i]);
      break;
    case NormFamily::L1: {
      Eigen::Index k = 0;
      g.cwiseAbs().maxCoeff(&k);  // first maximal index
      point[k] = -sign(g[k]);
      break;
    }
    case NormFamily::Lp: {
      const double q = ball.dual_exponent();
      const double gq = lp_norm(g, q);
      for (Eigen::Index i = 0; i < d; ++i)
        point[i] = -sign(g[i]) * std::pow(std::abs(g[i]) / gq, q - 1.0);
      break;
    }
  }
  return {point, -dual_norm_eval(ball, g)};
}

bool contains(const NormBall& ball, const Vector& x, double tol) {
  return norm_eval(ball, x) <= 1.0 + tol;
}

Vector sample_uniform(const NormBall& ball, Rng& rng) {
  const int d = ball.dim();
  Vector x(d);
  switch (ball.family()) {
    case NormFamily::L2: {
      std::normal_distribution<double> gauss;
      double r2 = 0.0;
      do {
        for (int i = 0; i < d; ++i) x[i] = gauss(rng);
        r2 = x.squaredNorm();
      } while (r2 == 0.0);
      const double radius = std::pow(uniform01(rng), 1.0 / d);
      return x * (radius / std::sqrt(r2));
    }
    case NormFamily::Linf:
      for (int i = 0; i < d; ++i) x[i] = 2.0 * uniform01(rng) - 1.0;
      return x;
    case NormFamily::L1: {
      // d + 1 exponentials normalized: uniform on the simplex with a slack
      // coordinate; random signs then fill the cross-polytope uniformly.
      std::exponential_distribution<double> expo(1.0);
      double total = 0.0;
      for (int i = 0; i < d; ++i) total += (x[i] = expo(rng));
      total += expo(rng);
      for (int i = 0; i < d; ++i) x[i] *= (uniform01(rng) < 0.5 ? -1.0 : 1.0) / total;
      return x;
    }
    case NormFamily::Lp:
      do {
        for (int i = 0; i < d; ++i) x[i] = 2.0 * uniform01(rng) - 1.0;
      } while (lp_norm(x, ball.exponent()) > 1.0);
      return x;
  }
  return x;
}

double euclidean_radius(const NormBall& ball) {
  // max ||x||_2 over ||x||_p <= 1 is 1 for p <= 2 and d^{1/2 - 1/p} otherwise.
  const double p = ball.exponent();
  if (p <= 2.0) return 1.0;
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  return std::pow(static_cast<double>(ball.dim()), 0.5 - inv_p);
}

double dual_radius(const NormBall& ball) {
  // max ||x||_q over ||x||_p <= 1: 1 when q <= p, else d^{1/q - 1/p}.
  const double p = ball.exponent();
  const double q = ball.dual_exponent();
  if (q >= p) return 1.0;
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  return std::pow(static_cast<double>(ball.dim()), 1.0 / q - inv_p);
}

}  // namespace scolab
