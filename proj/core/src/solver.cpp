#include "scolab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "scolab/errors.hpp"

namespace scolab {
namespace {

std::vector<double> as_list(const Vector& v) { return {v.begin(), v.end()}; }

std::size_t default_iterations(double L, double tol) {
  const double base = std::ceil(std::pow(2.0 * L / tol, 2.0));
  return static_cast<std::size_t>(std::min(16.0 * base, 1e9));
}

// Points a closed-form minimizer must not lose to: the origin, +-e_i, seeded
// uniform draws from K and small coordinate moves around the candidate.
std::vector<Vector> probe_points(const NormBall& ball, const Vector& center) {
  const int d = ball.dim();
  std::vector<Vector> probes{Vector::Zero(d)};
  for (int i = 0; i < d; ++i) {
    probes.push_back(Vector::Unit(d, i));
    probes.push_back(-Vector::Unit(d, i));
  }
  Rng rng(derive_seed(0x5eed, {static_cast<std::uint64_t>(d)}));
  for (int k = 0; k < 16; ++k) probes.push_back(sample_uniform(ball, rng));
  for (int i = 0; i < d; ++i)
    for (double step : {1e-3, -1e-3}) {
      Vector p = center;
      p[i] += step;
      probes.push_back(project(ball, p));
    }
  return probes;
}

void check_against_probes(const NormBall& ball, const std::function<double(const Vector&)>& f,
                          const Vector& x, double fx, const std::string& what) {
  for (const Vector& p : probe_points(ball, x)) {
    const double fp = f(p);
    if (fp < fx - 1e-9 * std::max(1.0, std::abs(fx))) {
      std::ostringstream msg;
      msg << what << ": closed-form minimizer has value " << fx << " but a probe reaches " << fp;
      throw IntegrityError(msg.str());
    }
  }
}

}  // namespace

nlohmann::json SolveReport::to_json() const {
  return {{"point", as_list(point)}, {"value", value}, {"tol", tol},
          {"iterations", iterations}, {"method", method}};
}

nlohmann::json NearErm::to_json() const {
  return {{"point", as_list(point)}, {"erm", erm.to_json()}, {"pop_excess", pop_excess}, {"empirical_gap", empirical_gap},
          {"index", index}, {"candidates", candidates}, {"qualifying", qualifying}};
}

SolveReport minimize_convex(const NormBall& ball, double lipschitz, const Objective& f, double tol,
                            std::size_t max_iterations) {
  if (!(tol > 0.0)) throw InputError("solver tolerance must be positive");
  const double L = lipschitz > 0.0 ? lipschitz : 1.0;
  const double R = euclidean_radius(ball);
  if (max_iterations == 0) max_iterations = default_iterations(L, tol);

  const int d = ball.dim();
  Vector x = Vector::Zero(d);
  Vector best_x = x;
  double best = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  Vector weighted_x = Vector::Zero(d), weighted_g = Vector::Zero(d);
  double weight = 0.0, weighted_const = 0.0;

  SolveReport report;
  report.method = "subgradient";
  std::size_t t = 1;
  for (;; ++t) {
    const double fx = f.value(x);
    const Vector g = f.subgradient(x);
    if (fx < best) best = fx, best_x = x;

    // f(y) >= f(x_t) + <g_t, y - x_t> for every t; minimize over K, both for
    // the single cut and for the step-weighted average of all cuts.
    const double gx = g.dot(x);
    lower = std::max(lower, fx - gx - dual_norm_eval(ball, g));
    const double eta = R / (L * std::sqrt(static_cast<double>(t)));
    weighted_const += eta * (fx - gx);
    weighted_g += eta * g;
    weighted_x += eta * x;
    weight += eta;
    lower = std::max(lower, (weighted_const - dual_norm_eval(ball, weighted_g)) / weight);

    const bool check = (t & (t - 1)) == 0 || t % 256 == 0 || t >= max_iterations;
    if (check) {
      const Vector avg = weighted_x / weight;
      const double favg = f.value(avg);
      report.point = favg <= best ? avg : best_x;
      report.value = std::min(favg, best);
      report.tol = std::max(0.0, report.value - lower);
      if (report.tol <= tol || t >= max_iterations) break;
    }
    x = project(ball, x - eta * g);
  }
  report.iterations = t;
  return report;
}

SolveReport minimize_empirical(const Instance& inst, const Sample& s, double tol,
                               const SolveOptions& opts) {
  if (s.size() == 0) throw InputError("empirical minimization needs a nonempty sample");
  const OutcomeCounts counts = count_outcomes(s);
  Objective f{[&](const Vector& x) { return inst.mean_loss(counts, x); },
              [&](const Vector& x) {
                Vector g = Vector::Zero(inst.ball().dim());
                for (const auto& [z, count] : counts.entries)
                  g += static_cast<double>(count) * inst.subgradient(z, x);
                return Vector(g / static_cast<double>(counts.total));
              }};
  if (opts.use_closed_form) {
    if (auto closed = inst.empirical_minimizer(s)) {
      SolveReport report;
      report.point = *closed;
      report.value = f.value(report.point);
      report.tol = 0.0;
      report.method = "closed-form";
      check_against_probes(inst.ball(), f.value, report.point, report.value,
                           inst.label() + " empirical minimizer");
      return report;
    }
  }
  return minimize_convex(inst.ball(), inst.lipschitz(), f, tol, opts.max_iterations);
}

SolveReport population_minimizer(const Instance& inst, double tol, const SolveOptions& opts) {
  Objective f{[&](const Vector& x) { return inst.expected_loss(x); },
              [&](const Vector& x) { return inst.expected_subgradient(x); }};
  SolveReport solved = minimize_convex(inst.ball(), inst.lipschitz(), f, tol, opts.max_iterations);
  if (!opts.use_closed_form) return solved;
  const auto known = inst.known_minimizer();
  if (!known) return solved;

  SolveReport report;
  report.point = *known;
  report.value = f.value(report.point);
  report.iterations = solved.iterations;
  report.method = "known";
  if (report.value > solved.value + tol) {
    std::ostringstream msg;
    msg << inst.label() << ": known minimizer has F = " << report.value
        << " but the solver reached " << solved.value;
    throw IntegrityError(msg.str());
  }
  report.tol = std::max(0.0, report.value - (solved.value - solved.tol));
  return report;
}

std::vector<Vector> near_erm_candidates(const Instance& inst, const Sample& s,
                                        std::span<const Vector> net_points, const Vector& erm,
                                        const Vector& xstar) {
  std::vector<Vector> candidates(net_points.begin(), net_points.end());
  for (Vector& v : inst.spurious_candidates(s)) candidates.push_back(std::move(v));
  candidates.push_back(erm);
  candidates.push_back(xstar);
  return candidates;
}

NearErm worst_near_erm(const Instance& inst, const Sample& s, double eps,
                       std::span<const Vector> net_points, const SolveReport& population,
                       double tol, Premise premise) {
  const OutcomeCounts counts = count_outcomes(s);
  const SolveReport erm = minimize_empirical(inst, s, tol);

  const std::vector<Vector> candidates =
      near_erm_candidates(inst, s, net_points, erm.point, population.point);

  std::vector<double> emp(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) emp[i] = inst.mean_loss(counts, candidates[i]);
  const double at_star = emp.back();
  const double reference =
      premise == Premise::AtMinimizer ? at_star : std::min(erm.value, *std::min_element(emp.begin(), emp.end()));

  NearErm out;
  out.erm = erm;
  out.candidates = candidates.size();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!(emp[i] <= reference + eps)) continue;
    ++out.qualifying;
    const double F = inst.expected_loss(candidates[i]);
    if (F > worst) {
      worst = F;
      out.index = i;
    }
  }
  out.point = candidates[out.index];
  out.pop_excess = worst - population.value;
  out.empirical_gap = emp[out.index] - at_star;
  return out;
}

}  // namespace scolab
