#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "scolab/instance.hpp"

namespace scolab {

/// Per-outcome subgradients g_z at a population minimizer x* whose weighted
/// mean G satisfies <G, x - x*> >= 0 on K up to `violation`.
struct OptimalityCertificate {
  Vector xstar;
  double fstar = 0.0;                      // F(x*)
  std::map<Outcome, Vector> per_outcome_g; // explicit-weight instances
  std::optional<Vector> common_g;          // implicit instances: the same g for every z
  Vector G;
  /// max over K of -<G, x - x*> = ||G||_* + <G, x*>.
  double violation = 0.0;
  std::string strategy;  // "gradient", "tie-weights", "oracle" or "common"
  std::size_t sweeps = 0;

  /// g_z; throws InputError for an outcome the certificate does not cover.
  const Vector& g(Outcome z) const;
  nlohmann::json to_json() const;
};

/// max over K of -<G, x - x*>.
double certificate_violation(const NormBall& ball, const Vector& G, const Vector& xstar);

struct CertificateOptions {
  double tol = 1e-8;
  std::size_t max_sweeps = 200;
  std::size_t probes = 64;  // points used to confirm x* minimizes F
};

/// Picks g_z in the subdifferential of f_z at x*. Smooth outcomes use their
/// gradient; outcomes with several subdifferential extremes get convex weights
/// chosen by coordinate descent on the exact violation; implicit families use
/// their common subgradient. Throws CertificateError when the violation stays
/// above tol, and InputError when a probe point has lower F than x* by more
/// than tol.
OptimalityCertificate build_certificate(const Instance& inst, const Vector& xstar,
                                        const CertificateOptions& opts = {});

/// D(x, x*) = F(x) - F(x*) - <G, x - x*>.
double bregman(const OptimalityCertificate& cert, const Instance& inst, const Vector& x);

/// G-hat: sample mean of the certificate's g_z.
Vector empirical_G(const OptimalityCertificate& cert, const OutcomeCounts& counts);

/// D-hat(x, x*) = F-hat(x) - F-hat(x*) - <G-hat, x - x*>.
double empirical_bregman(const OptimalityCertificate& cert, const Instance& inst, const Sample& s,
                         const Vector& x);

struct Truncated {
  double T = 0.0;
  double That = 0.0;
  bool active = false;  // some <g_z, x - x*> fell below -2c
};

/// T_z = f_z(x) - f_z(x*) - max(-2c, <g_z, x - x*>); T is the population mean,
/// T-hat the sample mean.
Truncated truncated_divergence(const OptimalityCertificate& cert, const Instance& inst,
                               const Sample& s, const Vector& x, double c);

struct Representativeness {
  double value = 0.0;       // max over the points of L(x) - L-hat(x)
  std::size_t argmax = 0;
  std::size_t points = 0;
};

/// Net-restricted representativeness with l_g(a) = max(-2c, a - <g, x*>).
/// The true supremum over K exceeds `value` by at most 2 L times the cover
/// radius of `points`.
Representativeness representativeness(const OptimalityCertificate& cert, const Instance& inst,
                                      const Sample& s, std::span<const Vector> points, double c);

struct DivergenceReport {
  Vector x;
  double D = 0.0;
  double Dhat = 0.0;
  double T = 0.0;
  double That = 0.0;
  double Rep = 0.0;
  std::size_t rep_points = 0;
  std::size_t sample_size = 0;
  std::uint64_t sample_seed = 0;
  nlohmann::json certificate;

  nlohmann::json to_json() const;
};

DivergenceReport divergence_report(const OptimalityCertificate& cert, const Instance& inst,
                                   const Sample& s, const Vector& x,
                                   std::span<const Vector> rep_points);

}  // namespace scolab
