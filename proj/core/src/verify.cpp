#include "scolab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scolab/errors.hpp"
#include "scolab/net.hpp"
#include "scolab/parallel.hpp"
#include "scolab/rademacher.hpp"

namespace scolab {
namespace {

constexpr double kClaimTol = 1e-9;

struct Moments {
  double mean = 0.0;
  double stderr = 0.0;
};

Moments moments(const std::vector<double>& v) {
  const double T = static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / T;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / (T - 1.0) / T) : 0.0};
}

Moments frequency(const std::vector<double>& events) {
  const double T = static_cast<double>(events.size());
  double hits = 0.0;
  for (double e : events) hits += e;
  const double p = hits / T;
  return {p, std::sqrt(p * (1.0 - p) / T)};
}

// T_z at x for the certificate's g_z.
double truncated_term(const OptimalityCertificate& cert, const Instance& inst, Outcome z,
                      const Vector& x, double c) {
  return inst.loss(z, x) - inst.loss(z, cert.xstar) - std::max(-2.0 * c, cert.g(z).dot(x - cert.xstar));
}

double max_g_norm(const OptimalityCertificate& cert, const Instance& inst) {
  if (cert.common_g) return cert.common_g->norm();
  double m = 0.0;
  const auto weights = inst.weights();
  for (const auto& [z, g] : cert.per_outcome_g)
    if (weights[z] != 0.0) m = std::max(m, g.norm());
  return m;
}

}  // namespace

ConcentrationMode parse_mode(std::string_view name) {
  if (name == "bregman") return ConcentrationMode::Bregman;
  if (name == "gradient") return ConcentrationMode::Gradient;
  if (name == "variance") return ConcentrationMode::Variance;
  if (name == "rep") return ConcentrationMode::Rep;
  throw ConfigError("unknown concentration mode '" + std::string(name) + "'");
}

std::string mode_name(ConcentrationMode mode) {
  switch (mode) {
    case ConcentrationMode::Bregman: return "bregman";
    case ConcentrationMode::Gradient: return "gradient";
    case ConcentrationMode::Variance: return "variance";
    case ConcentrationMode::Rep: return "rep";
  }
  return "?";
}

nlohmann::json ConcentrationReport::to_json() const {
  return {{"mode", mode_name(mode)}, {"n", n}, {"trials", trials}, {"seed", seed},
          {"empirical", empirical}, {"analytic_bound", analytic_bound},
          {"mc_stderr", mc_stderr}, {"pass", pass}, {"detail", detail}};
}

std::string ConcentrationReport::csv_header() {
  return "mode,n,trials,seed,empirical,analytic_bound,mc_stderr,pass";
}

std::string ConcentrationReport::csv_row() const {
  auto num = [](double v) { return nlohmann::json(v).dump(); };
  std::ostringstream row;
  row << mode_name(mode) << ',' << n << ',' << trials << ',' << seed << ',' << num(empirical) << ','
      << num(analytic_bound) << ',' << num(mc_stderr) << ',' << (pass ? "true" : "false");
  return row.str();
}

ConcentrationReport verify_concentration(const Instance& inst, const OptimalityCertificate& cert,
                                         const Vector& x, std::size_t n, std::size_t trials,
                                         std::uint64_t seed, ConcentrationMode mode,
                                         const ConcentrationOptions& opts) {
  if (trials < 100) throw InputError("concentration checks need at least 100 trials");
  if (n == 0) throw InputError("concentration checks need n >= 1");
  if (!contains(inst.ball(), x, 1e-9)) throw InputError("point lies outside K");
  const double c = inst.bound();
  const double nn = static_cast<double>(n);

  ConcentrationReport r;
  r.mode = mode;
  r.n = n;
  r.trials = trials;
  r.seed = seed;
  std::vector<double> per_trial(trials);
  auto sample_for = [&](std::size_t t) { return draw_sample(inst, n, derive_seed(seed, {t})); };

  switch (mode) {
    case ConcentrationMode::Bregman: {
      const double D = bregman(cert, inst, x);
      if (!(D > 1e-12)) throw InputError("bregman mode needs D(x, x*) > 0");
      const Truncated pop = truncated_divergence(cert, inst, draw_sample(inst, 1, seed), x, c);
      parallel_for(trials, opts.jobs, [&](std::size_t t) {
        const Truncated tr = truncated_divergence(cert, inst, sample_for(t), x, c);
        per_trial[t] = tr.That <= pop.T / 2.0 ? 1.0 : 0.0;
      });
      const Moments m = frequency(per_trial);
      r.empirical = m.mean;
      r.mc_stderr = m.stderr;
      r.analytic_bound = std::exp(-pop.T * nn / (40.0 * c));
      r.detail = {{"D", D}, {"T", pop.T}, {"c", c}};
      break;
    }
    case ConcentrationMode::Gradient: {
      std::vector<double> events(trials, 0.0);
      parallel_for(trials, opts.jobs, [&](std::size_t t) {
        const Vector Ghat = empirical_G(cert, count_outcomes(sample_for(t)));
        per_trial[t] = (Ghat - cert.G).squaredNorm();
        if (opts.eps > 0.0) events[t] = per_trial[t] > opts.eps * opts.eps ? 1.0 : 0.0;
      });
      const Moments m = moments(per_trial);
      const double spread = 2.0 * max_g_norm(cert, inst);
      r.empirical = m.mean;
      r.mc_stderr = m.stderr;
      r.analytic_bound = spread * spread / nn;
      r.detail = {{"max_g_norm", spread / 2.0}};
      if (opts.eps > 0.0) {
        const Moments e = frequency(events);
        r.detail["eps"] = opts.eps;
        r.detail["tail_frequency"] = e.mean;
        r.detail["tail_bound"] = spread * spread / (opts.eps * opts.eps * nn);
      }
      break;
    }
    case ConcentrationMode::Variance: {
      if (n < 2) throw InputError("variance mode needs n >= 2");
      const double T = truncated_divergence(cert, inst, draw_sample(inst, 1, seed), x, c).T;
      parallel_for(trials, opts.jobs, [&](std::size_t t) {
        const OutcomeCounts counts = count_outcomes(sample_for(t));
        double s = 0.0, s2 = 0.0;
        for (const auto& [z, count] : counts.entries) {
          const double v = truncated_term(cert, inst, z, x, c);
          s += static_cast<double>(count) * v;
          s2 += static_cast<double>(count) * v * v;
        }
        const double mean = s / nn;
        per_trial[t] = std::max(0.0, (s2 - nn * mean * mean) / (nn - 1.0));
      });
      const Moments m = moments(per_trial);
      r.empirical = m.mean;
      r.mc_stderr = m.stderr;
      r.analytic_bound = (4.0 * c - T) * T;
      r.detail = {{"T", T}, {"c", c}};
      break;
    }
    case ConcentrationMode::Rep: {
      if (!(opts.delta > 0.0 && opts.delta < 1.0)) throw InputError("rep mode needs delta in (0, 1)");
      std::vector<Vector> points = opts.points;
      double radius = std::numeric_limits<double>::quiet_NaN();
      if (points.empty()) {
        Net net = build_net(inst.ball(), 0.25, kDefaultCandidateBudget, seed);
        points = std::move(net.points);
        radius = net.cover_radius;
      }
      const double bound = 2.0 * inst.lipschitz() * rad_upper_bound(inst.ball(), n) +
                           c * std::sqrt(2.0 * std::log(2.0 / opts.delta) / nn);
      std::vector<double> reps(trials);
      parallel_for(trials, opts.jobs, [&](std::size_t t) {
        reps[t] = representativeness(cert, inst, sample_for(t), points, c).value;
        per_trial[t] = reps[t] > bound ? 1.0 : 0.0;
      });
      const Moments m = frequency(per_trial);
      r.empirical = m.mean;
      r.mc_stderr = m.stderr;
      r.analytic_bound = opts.delta;
      r.detail = {{"rep_bound", bound},
                  {"mean_rep", moments(reps).mean},
                  {"max_rep", *std::max_element(reps.begin(), reps.end())},
                  {"delta", opts.delta},
                  {"net_points", points.size()},
                  {"net_restricted", true}};
      if (!std::isnan(radius)) r.detail["net_cover_radius"] = radius;
      break;
    }
  }
  r.pass = r.empirical <= r.analytic_bound + 3.0 * r.mc_stderr;
  return r;
}

const char* ClaimTally::name(std::size_t claim) {
  static const char* names[kClaimCount] = {"bregman_lower_bound", "empirical_bregman_cap",
                                           "truncated_empirical_cap", "truncated_lower_bound"};
  return names[claim];
}

std::size_t ClaimTally::total_violations() const {
  std::size_t total = 0;
  for (std::size_t v : violations) total += v;
  return total;
}

void ClaimTally::merge(const ClaimTally& other) {
  for (std::size_t k = 0; k < kClaimCount; ++k) {
    checked[k] += other.checked[k];
    violations[k] += other.violations[k];
  }
  samples += other.samples;
}

nlohmann::json ClaimTally::to_json() const {
  nlohmann::json j{{"samples", samples}, {"total_violations", total_violations()}};
  for (std::size_t k = 0; k < kClaimCount; ++k)
    j["claims"][name(k)] = {{"checked", checked[k]}, {"violations", violations[k]}};
  return j;
}

ClaimTally ClaimTally::from_json(const nlohmann::json& j) {
  ClaimTally t;
  t.samples = j.at("samples").get<std::size_t>();
  for (std::size_t k = 0; k < kClaimCount; ++k) {
    const auto& c = j.at("claims").at(name(k));
    t.checked[k] = c.at("checked").get<std::size_t>();
    t.violations[k] = c.at("violations").get<std::size_t>();
  }
  return t;
}

void check_conditional_claims(const OptimalityCertificate& cert, const Instance& inst,
                              const Sample& s, std::span<const Vector> points, double eps,
                              std::span<const Vector> rep_points, std::optional<double> net_radius,
                              ClaimTally& tally) {
  const double c = inst.bound();
  const OutcomeCounts counts = count_outcomes(s);
  const Vector Ghat = empirical_G(cert, counts);
  const double grad_dev = (Ghat - cert.G).norm();
  const double fhat_star = inst.mean_loss(counts, cert.xstar);
  const bool euclidean = inst.ball().family() == NormFamily::L2;

  std::optional<double> rep, slack;
  if (cert.common_g) {
    rep = 0.0, slack = 0.0;
  } else if (net_radius && !rep_points.empty()) {
    rep = representativeness(cert, inst, s, rep_points, c).value;
    slack = 2.0 * inst.lipschitz() * *net_radius;
  }
  ++tally.samples;

  for (const Vector& x : points) {
    const double gap_hat = inst.mean_loss(counts, x) - fhat_star;
    if (gap_hat > 6.0 * eps) continue;
    const double gap = inst.expected_loss(x) - cert.fstar;
    const Vector step = x - cert.xstar;

    if (euclidean && gap_hat <= 5.0 * eps && grad_dev <= eps) {
      const double D = gap - cert.G.dot(step);
      const double Dhat = gap_hat - Ghat.dot(step);
      ++tally.checked[kBregmanLowerBound];
      ++tally.checked[kEmpiricalBregmanCap];
      if (D < gap - 7.0 * eps - kClaimTol) ++tally.violations[kBregmanLowerBound];
      if (Dhat > 7.0 * eps + kClaimTol) ++tally.violations[kEmpiricalBregmanCap];
    }
    if (rep && *rep <= 2.0 * eps) {
      const Truncated tr = truncated_divergence(cert, inst, s, x, c);
      ++tally.checked[kTruncatedEmpiricalCap];
      if (tr.That > 8.0 * eps + *slack + kClaimTol) ++tally.violations[kTruncatedEmpiricalCap];
      if (gap_hat <= 5.0 * eps) {
        ++tally.checked[kTruncatedLowerBound];
        if (tr.T < gap - 7.0 * eps - *slack - kClaimTol) ++tally.violations[kTruncatedLowerBound];
      }
    }
  }
}

}  // namespace scolab
