// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "scolab/divergence.hpp"
#include "scolab/families.hpp"
#include "scolab/net.hpp"
#include "scolab/rademacher.hpp"
#include "scolab/sweep.hpp"
#include "scolab/verify.hpp"
#include "support.hpp"

using namespace scolab;
using scolab::test::vec;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Claim tallies gathered by A5 and A6, checked by A10.
ClaimTally g_claims;
bool g_claims_ran = false;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict a1_certificate() {
  const InstancePtr inst = make_appendix_pair().as_instance();
  CertificateOptions opts;
  opts.tol = 1e-9;
  const OptimalityCertificate cert = build_certificate(*inst, vec({-0.1}), opts);
  // outcomes are 2 f1 and 2 f2 with weight 1/2 each
  const double g1 = cert.g(0)[0] / 2, g2 = cert.g(1)[0] / 2;
  const bool pass = cert.violation <= 1e-9 && std::abs(g1 + 0.4) <= 1e-9 && std::abs(g2 - 0.4) <= 1e-9 &&
                    std::abs(g2) <= 1.0;
  return {pass, fmt("violation=%.3g g1=%.12f g2=%.12f", cert.violation, g1, g2)};
}

Verdict a2_bregman() {
  const InstancePtr q =
      make_quadratic_instance({vec({-1, 0}), vec({1, 0}), vec({0, 0.5})}, NormBall::l2(2));
  const Vector xs = *q->known_minimizer();
  const OptimalityCertificate cert = build_certificate(*q, xs);
  const Sample every{{0, 1, 2}, 0};
  Rng rng(2);
  double worst_formula = 0.0, worst_identity = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vector x = sample_uniform(q->ball(), rng);
    const double D = bregman(cert, *q, x);
    worst_formula = std::max(worst_formula, std::abs(D - (x - xs).squaredNorm() / 4));
    worst_identity = std::max(worst_identity, std::abs(empirical_bregman(cert, *q, every, x) - D));
  }
  return {worst_formula <= 1e-9 && worst_identity <= 1e-12,
          fmt("max|D - |x-x*|^2/4|=%.2e max|Dhat(full) - D|=%.2e", worst_formula, worst_identity)};
}

Verdict a3_bregman_tail() {
  const InstancePtr h = make_hard_instance({vec({1, 0}), vec({0, 1})}, 0.5);
  const OptimalityCertificate cert = build_certificate(*h, vec({0, 0}));
  const std::size_t trials = 10000;
  const ConcentrationReport r =
      verify_concentration(*h, cert, vec({1, 0}), 100, trials, 3, ConcentrationMode::Bregman);
  // T-hat <= T/2 means e1 was activated in at most 25 of the 100 draws.
  const double exact = scolab::test::binomial_cdf(100, 0.5, 25);
  // With zero observed hits the sample stderr is 0, so the cross-check uses
  // the binomial standard error at the exact probability.
  const double se = std::sqrt(exact * (1 - exact) / trials);
  const bool cross = std::abs(r.empirical - exact) <= 3 * std::max(se, r.mc_stderr);
  const bool bound_ok = std::abs(r.analytic_bound - std::exp(-0.625)) <= 1e-12;
  return {r.pass && cross && bound_ok,
          fmt("empirical=%.3g bound=%.4f exact=%.3e stderr=%.2e", r.empirical, r.analytic_bound, exact, se)};
}

Verdict a4_gradient() {
  const InstancePtr coin = make_coin_instance(0.1);
  const OptimalityCertificate cert = build_certificate(*coin, vec({0}));
  bool pass = true;
  std::ostringstream detail;
  for (std::size_t n : {25, 100, 400}) {
    const ConcentrationReport r =
        verify_concentration(*coin, cert, vec({0.5}), n, 10000, n, ConcentrationMode::Gradient);
    const double nn = static_cast<double>(n);
    const bool ok = std::abs(r.empirical - 1 / nn) <= 4 * r.mc_stderr && r.empirical <= 4 / nn;
    pass = pass && ok;
    detail << fmt("n=%zu mean=%.5f (1/n=%.5f, se=%.1e) ", n, r.empirical, 1 / nn, r.mc_stderr);
  }
  return {pass, detail.str()};
}

Verdict a5_theorem() {
  const std::size_t n0 = theorem_sample_bound(1, 0.3);
  bool pass = true;
  std::ostringstream detail;
  detail << "n0=" << n0;
  const nlohmann::json families[] = {
      {{"family", "coin"}, {"eps0", 0.1}},
      {{"family", "quadratic"}, {"ball", "l2"}, {"centers", nlohmann::json::array({{-1.0}, {1.0}})}}};
  for (const nlohmann::json& fam : families) {
    SweepConfig cfg;
    cfg.family = fam;
    cfg.d_grid = {1};
    cfg.eps_grid = {0.3};
    cfg.n_grid = {n0};
    cfg.trials = 200;
    cfg.multiplier = 40;
    cfg.seed = 5;
    const SweepResult r = run_sweep(cfg);
    const CellResult& cell = r.cells.at(0);
    pass = pass && !cell.skipped && cell.freq <= 0.25;
    g_claims.merge(r.claims);
    detail << fmt(" %s: %zu/%zu failures", fam["family"].get<std::string>().c_str(), cell.failures, cell.trials);
  }
  g_claims_ran = true;
  return {pass, detail.str()};
}

Verdict a6_scaling() {
  std::ifstream in(std::string(SCOLAB_SOURCE_DIR) + "/configs/sweep_hard_scaling.json");
  const SweepConfig cfg = SweepConfig::from_json(nlohmann::json::parse(in));
  const SweepResult r = run_sweep(cfg);
  g_claims.merge(r.claims);
  std::ostringstream detail;
  bool resolved = true, ratio_increasing = true;
  double last_ratio = 0.0;
  for (const ThresholdResult& t : r.thresholds) {
    resolved = resolved && t.erm.resolved && t.uniform && t.uniform->resolved;
    if (!resolved) break;
    const double ratio = static_cast<double>(t.uniform->n_star) / static_cast<double>(t.erm.n_star);
    ratio_increasing = ratio_increasing && ratio > last_ratio;
    last_ratio = ratio;
    detail << fmt("d=%d n*=%zu n_uc=%zu; ", t.d, t.erm.n_star, t.uniform->n_star);
  }
  double exponent = NAN, uniform_exponent = NAN;
  for (const ScalingFit& f : r.fits) {
    if (f.axis != "d") continue;
    (f.series == "erm" ? exponent : uniform_exponent) = f.exponent;
  }
  detail << fmt("exponent erm=%.3f uniform=%.3f ratio increasing=%s", exponent, uniform_exponent,
                ratio_increasing ? "yes" : "no");
  const bool pass = resolved && exponent >= 0.6 && exponent <= 1.4 && ratio_increasing;
  return {pass, detail.str()};
}

Verdict a7_rademacher() {
  bool pass = rad_exact(NormBall::l2(2), std::vector<Vector>{vec({1, 0}), vec({1, 0})}).value == 0.5;
  pass = pass && rad_inverse(NormBall::l2(1), 0.1) == 101;
  Rng rng(7);
  auto random_dual = [&](const NormBall& b) {
    Vector g = scolab::test::random_vector(rng, b.dim(), 1.0);
    const double norm = dual_norm_eval(b, g);
    return norm > 1.0 ? Vector(g / norm) : g;
  };
  int mc_ok = 0, mono_ok = 0;
  for (int c = 0; c < 50; ++c) {
    const int d = 1 + c % 3;
    const NormBall b = scolab::test::supported_balls(d)[c % 3];
    std::vector<Vector> S;
    for (int j = 0; j < 1 + c % 10; ++j) S.push_back(random_dual(b));
    const RadEstimate exact = rad_exact(b, S);
    const RadEstimate mc = rad_mc(b, S, 4000, 1000 + c);
    mc_ok += std::abs(mc.value - exact.value) <= 4 * mc.stderr + 1e-12;
    std::vector<Vector> T;
    for (int j = 0; j < 2 + c % 12; ++j) T.push_back(random_dual(b));
    mono_ok += check_monotonicity(b, T).pass;
  }
  pass = pass && mc_ok == 50 && mono_ok == 50;
  return {pass, fmt("exact(e1,e1)=0.5 inverse(0.1)=101 mc agreement %d/50 monotonicity %d/50", mc_ok, mono_ok)};
}

Verdict a8_nets() {
  bool pass = true;
  std::ostringstream detail;
  for (int d = 1; d <= 3; ++d)
    for (double eps : {0.5, 1.0})
      for (const NormBall& b : scolab::test::supported_balls(d)) {
        const Net net = build_net(b, eps, kDefaultCandidateBudget, 11);
        const double radius = measure_cover_radius(net, 100000, 13);
        const bool ok = static_cast<double>(net.points.size()) <= packing_size_bound(d, eps) &&
                        radius <= 2 * eps;
        pass = pass && ok;
        if (b.family() == NormFamily::L2) detail << fmt("d=%d eps=%.1f |N|=%zu r=%.3f; ", d, eps, net.points.size(), radius);
      }
  detail << "(l1, linf also checked)";
  return {pass, detail.str()};
}

Verdict a9_rep() {
  const InstancePtr coin = make_coin_instance(0.1);
  const OptimalityCertificate cert = build_certificate(*coin, vec({0}));
  ConcentrationOptions opts;
  opts.delta = 0.1;
  opts.points = build_net(coin->ball(), 0.05, kDefaultCandidateBudget, 0).points;
  const ConcentrationReport r =
      verify_concentration(*coin, cert, vec({0}), 400, 500, 9, ConcentrationMode::Rep, opts);
  const double within = 1.0 - r.empirical;
  return {r.pass,
          fmt("Rep<=%.4f in %.1f%% of trials (max Rep %.4f)", r.detail.at("rep_bound").get<double>(),
              100 * within, r.detail.at("max_rep").get<double>())};
}

Verdict a10_claims() {
  if (!g_claims_ran) return {false, "A5 did not run"};
  std::ostringstream detail;
  detail << "violations=" << g_claims.total_violations() << " checked:";
  for (std::size_t k = 0; k < kClaimCount; ++k) detail << ' ' << ClaimTally::name(k) << '=' << g_claims.checked[k];
  return {g_claims.total_violations() == 0, detail.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    double budget_s;
    std::function<Verdict()> run;
  };
  const Criterion criteria[] = {
      {"A1", 1, a1_certificate}, {"A2", 1, a2_bregman},    {"A3", 30, a3_bregman_tail},
      {"A4", 30, a4_gradient},   {"A5", 120, a5_theorem},  {"A6", 600, a6_scaling},
      {"A7", 60, a7_rademacher}, {"A8", 60, a8_nets},      {"A9", 60, a9_rep},
      {"A10", 0, a10_claims}};
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      v.pass = false;
      v.detail += fmt(" [over the %.0f s budget]", c.budget_s);
    }
    failures += !v.pass;
    std::printf("%-4s %s  %s  (%.2f s)\n", c.id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
