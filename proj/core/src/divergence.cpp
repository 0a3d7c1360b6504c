#include "scolab/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scolab/errors.hpp"

namespace scolab {
namespace {

std::vector<double> as_list(const Vector& v) { return {v.begin(), v.end()}; }

void check_minimal(const Instance& inst, double fstar,
                   const CertificateOptions& opts) {
  const NormBall& ball = inst.ball();
  std::vector<Vector> probes{Vector::Zero(ball.dim())};
  for (int i = 0; i < ball.dim(); ++i) {
    probes.push_back(Vector::Unit(ball.dim(), i));
    probes.push_back(-Vector::Unit(ball.dim(), i));
  }
  Rng rng(derive_seed(0xce47, {static_cast<std::uint64_t>(ball.dim())}));
  for (std::size_t k = 0; k < opts.probes; ++k) probes.push_back(sample_uniform(ball, rng));
  const double slack = std::max(opts.tol, 1e-9);
  for (const Vector& p : probes) {
    const double fp = inst.expected_loss(p);
    if (fp < fstar - slack) {
      std::ostringstream msg;
      msg << "x* is not a population minimizer: F(x*) = " << fstar << " but a probe has F = " << fp;
      throw InputError(msg.str());
    }
  }
}

// Golden-section search for the minimum of a convex function on [0, 1].
template <class Fn>
double golden_section(Fn&& phi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = phi(c), fd = phi(d);
  while (b - a > 1e-13) {
    if (fc <= fd) {
      b = d, d = c, fd = fc;
      c = b - r * (b - a), fc = phi(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + r * (b - a), fd = phi(d);
    }
  }
  return (a + b) / 2.0;
}

}  // namespace

const Vector& OptimalityCertificate::g(Outcome z) const {
  if (common_g) return *common_g;
  auto it = per_outcome_g.find(z);
  if (it == per_outcome_g.end()) throw InputError("certificate has no subgradient for this outcome");
  return it->second;
}

nlohmann::json OptimalityCertificate::to_json() const {
  nlohmann::json j{{"xstar", as_list(xstar)}, {"fstar", fstar},   {"G", as_list(G)},
                   {"violation", violation}, {"strategy", strategy}, {"sweeps", sweeps}};
  if (common_g) {
    j["common_g"] = as_list(*common_g);
  } else {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& [z, g] : per_outcome_g) per.push_back({{"outcome", z}, {"g", as_list(g)}});
    j["per_outcome_g"] = per;
  }
  return j;
}

double certificate_violation(const NormBall& ball, const Vector& G, const Vector& xstar) {
  return std::max(0.0, dual_norm_eval(ball, G) + G.dot(xstar));
}

OptimalityCertificate build_certificate(const Instance& inst, const Vector& xstar,
                                        const CertificateOptions& opts) {
  const NormBall& ball = inst.ball();
  if (xstar.size() != ball.dim()) throw InputError("x* has the wrong dimension");
  if (!contains(ball, xstar, 1e-9)) throw InputError("x* lies outside K");

  OptimalityCertificate cert;
  cert.xstar = xstar;
  cert.fstar = inst.expected_loss(xstar);
  check_minimal(inst, cert.fstar, opts);

  if (!inst.explicit_weights()) {
    auto common = inst.common_subgradient(xstar);
    if (!common)
      throw UnsupportedError(inst.label() + ": no common subgradient at x* for an implicit outcome space");
    cert.common_g = *common;
    cert.G = *common;
    cert.strategy = "common";
  } else {
    const auto weights = inst.weights();
    const std::size_t k = weights.size();
    std::vector<std::vector<Vector>> extremes(k);
    std::vector<Vector> lambda(k);
    bool oracle = false, ties = false;
    for (std::size_t z = 0; z < k; ++z) {
      extremes[z] = inst.subdifferential_extremes(z, xstar);
      if (extremes[z].empty()) {
        extremes[z].push_back(inst.subgradient(z, xstar));
        oracle = true;
      }
      ties |= extremes[z].size() > 1;
      lambda[z] = Vector::Constant(static_cast<Eigen::Index>(extremes[z].size()),
                                   1.0 / static_cast<double>(extremes[z].size()));
    }
    auto g_of = [&](std::size_t z) {
      Vector g = Vector::Zero(ball.dim());
      for (std::size_t i = 0; i < extremes[z].size(); ++i) g += lambda[z][i] * extremes[z][i];
      return g;
    };
    std::vector<Vector> g(k);
    auto recompute = [&] {
      Vector G = Vector::Zero(ball.dim());
      for (std::size_t z = 0; z < k; ++z) {
        g[z] = g_of(z);
        G += weights[z] * g[z];
      }
      return G;
    };
    cert.G = recompute();
    cert.strategy = ties ? "tie-weights" : (oracle ? "oracle" : "gradient");

    double viol = certificate_violation(ball, cert.G, xstar);
    for (cert.sweeps = 0; ties && cert.sweeps < opts.max_sweeps && viol > 1e-15; ++cert.sweeps) {
      const double before = viol;
      for (std::size_t z = 0; z < k; ++z) {
        if (extremes[z].size() < 2 || weights[z] == 0.0) continue;
        for (std::size_t i = 0; i < extremes[z].size(); ++i) {
          const Vector delta = weights[z] * (extremes[z][i] - g[z]);
          auto phi = [&](double t) { return certificate_violation(ball, cert.G + t * delta, xstar); };
          double t = golden_section(phi);
          if (phi(1.0) <= phi(t)) t = 1.0;
          const double value = phi(t);
          if (!(value < viol)) continue;
          lambda[z] *= 1.0 - t;
          lambda[z][static_cast<Eigen::Index>(i)] += t;
          g[z] = g_of(z);
          cert.G += t * delta;
          viol = value;
        }
      }
      cert.G = recompute();
      viol = certificate_violation(ball, cert.G, xstar);
      if (before - viol <= 1e-15) {
        ++cert.sweeps;
        break;
      }
    }
    for (std::size_t z = 0; z < k; ++z) cert.per_outcome_g.emplace(z, g[z]);
  }

  cert.violation = certificate_violation(ball, cert.G, xstar);
  if (cert.violation > opts.tol) {
    std::ostringstream msg;
    msg << inst.label() << ": first-order certificate violation " << cert.violation
        << " exceeds tolerance " << opts.tol;
    throw CertificateError(msg.str(), linear_minimize(ball, cert.G).point, cert.violation);
  }
  return cert;
}

double bregman(const OptimalityCertificate& cert, const Instance& inst, const Vector& x) {
  return population_loss(inst, x) - cert.fstar - cert.G.dot(x - cert.xstar);
}

Vector empirical_G(const OptimalityCertificate& cert, const OutcomeCounts& counts) {
  if (cert.common_g) return *cert.common_g;
  Vector acc = Vector::Zero(cert.xstar.size());
  for (const auto& [z, count] : counts.entries) acc += static_cast<double>(count) * cert.g(z);
  return acc / static_cast<double>(counts.total);
}

double empirical_bregman(const OptimalityCertificate& cert, const Instance& inst, const Sample& s,
                         const Vector& x) {
  if (!contains(inst.ball(), x, 1e-9)) throw InputError("point lies outside K");
  const OutcomeCounts counts = count_outcomes(s);
  const Vector Ghat = empirical_G(cert, counts);
  return inst.mean_loss(counts, x) - inst.mean_loss(counts, cert.xstar) - Ghat.dot(x - cert.xstar);
}

Truncated truncated_divergence(const OptimalityCertificate& cert, const Instance& inst,
                               const Sample& s, const Vector& x, double c) {
  if (!contains(inst.ball(), x, 1e-9)) throw InputError("point lies outside K");
  const OutcomeCounts counts = count_outcomes(s);
  const Vector step = x - cert.xstar;
  Truncated out;
  if (cert.common_g) {
    const double a = cert.common_g->dot(step);
    out.active = a < -2.0 * c;
    const double lin = std::max(-2.0 * c, a);
    out.T = inst.expected_loss(x) - cert.fstar - lin;
    out.That = inst.mean_loss(counts, x) - inst.mean_loss(counts, cert.xstar) - lin;
    return out;
  }
  auto term = [&](Outcome z) {
    const double a = cert.g(z).dot(step);
    out.active |= a < -2.0 * c;
    return inst.loss(z, x) - inst.loss(z, cert.xstar) - std::max(-2.0 * c, a);
  };
  const auto weights = inst.weights();
  for (std::size_t z = 0; z < weights.size(); ++z)
    if (weights[z] != 0.0) out.T += weights[z] * term(z);
  for (const auto& [z, count] : counts.entries) out.That += static_cast<double>(count) * term(z);
  out.That /= static_cast<double>(counts.total);
  return out;
}

Representativeness representativeness(const OptimalityCertificate& cert, const Instance& inst,
                                      const Sample& s, std::span<const Vector> points, double c) {
  // Rep >= 0 always: both L and L-hat vanish at x*. argmax == points means x*.
  Representativeness rep;
  rep.points = points.size();
  rep.argmax = points.size();
  if (cert.common_g) return rep;  // L and L-hat coincide

  const OutcomeCounts counts = count_outcomes(s);
  const auto weights = inst.weights();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vector step = points[i] - cert.xstar;
    auto ell = [&](Outcome z) { return std::max(-2.0 * c, cert.g(z).dot(step)); };
    double L = 0.0, Lhat = 0.0;
    for (std::size_t z = 0; z < weights.size(); ++z)
      if (weights[z] != 0.0) L += weights[z] * ell(z);
    for (const auto& [z, count] : counts.entries) Lhat += static_cast<double>(count) * ell(z);
    Lhat /= static_cast<double>(counts.total);
    if (L - Lhat > rep.value) {
      rep.value = L - Lhat;
      rep.argmax = i;
    }
  }
  return rep;
}

nlohmann::json DivergenceReport::to_json() const {
  return {{"x", as_list(x)},         {"D", D},
          {"Dhat", Dhat},            {"T", T},
          {"That", That},            {"Rep", Rep},
          {"rep_net_restricted", true}, {"rep_points", rep_points},
          {"sample", {{"size", sample_size}, {"seed", sample_seed}}},
          {"certificate", certificate}};
}

DivergenceReport divergence_report(const OptimalityCertificate& cert, const Instance& inst,
                                   const Sample& s, const Vector& x,
                                   std::span<const Vector> rep_points) {
  DivergenceReport r;
  r.x = x;
  r.D = bregman(cert, inst, x);
  r.Dhat = empirical_bregman(cert, inst, s, x);
  const Truncated t = truncated_divergence(cert, inst, s, x, inst.bound());
  r.T = t.T;
  r.That = t.That;
  const Representativeness rep = representativeness(cert, inst, s, rep_points, inst.bound());
  r.Rep = rep.value;
  r.rep_points = rep.points;
  r.sample_size = s.size();
  r.sample_seed = s.seed;
  r.certificate = cert.to_json();
  return r;
}

}  // namespace scolab
