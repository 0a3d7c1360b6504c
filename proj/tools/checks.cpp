#include "checks.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "scolab/divergence.hpp"
#include "scolab/errors.hpp"
#include "scolab/families.hpp"
#include "scolab/net.hpp"
#include "scolab/parallel.hpp"
#include "scolab/solver.hpp"

namespace scolab::cli {
namespace {

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

Vector to_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> as_list(const Vector& v) { return {v.begin(), v.end()}; }

CheckOutcome certificate_check(const nlohmann::json& c) {
  require_keys(c, {"type", "name", "instance", "x", "tol", "expect_g", "expect_tol"}, "certificate check");
  const InstancePtr inst = make_instance(c.at("instance"));
  const Vector x = c.contains("x") ? to_vector(c["x"]) : population_minimizer(*inst, 1e-6).point;
  CertificateOptions opts;
  opts.tol = c.value("tol", 1e-9);
  CheckOutcome out;
  try {
    const OptimalityCertificate cert = build_certificate(*inst, x, opts);
    out.pass = cert.violation <= opts.tol;
    out.detail = cert.to_json();
    if (c.contains("expect_g")) {
      const double etol = c.value("expect_tol", 1e-9);
      Outcome z = 0;
      for (const auto& expected : c["expect_g"]) {
        const Vector diff = cert.g(z) - to_vector(expected);
        if (diff.lpNorm<Eigen::Infinity>() > etol) out.pass = false;
        ++z;
      }
    }
  } catch (const CertificateError& e) {
    out.pass = false;
    out.detail = {{"error", e.what()}, {"violation", e.violation()}, {"direction", as_list(e.direction())}};
  }
  return out;
}

CheckOutcome bregman_identity_check(const nlohmann::json& c, std::uint64_t seed) {
  require_keys(c, {"type", "name", "instance", "points", "seed"}, "bregman_identity check");
  const InstancePtr inst = make_instance(c.at("instance"));
  if (!inst->explicit_weights()) throw ConfigError("bregman_identity needs an explicit-weight instance");
  const SolveReport pop = population_minimizer(*inst, 1e-6);
  const OptimalityCertificate cert = build_certificate(*inst, pop.point);
  Rng rng(c.value("seed", seed));
  const std::size_t points = c.value("points", std::size_t{100});
  double worst_identity = 0.0, min_D = INFINITY;
  const auto weights = inst->weights();
  for (std::size_t k = 0; k < points; ++k) {
    const Vector x = sample_uniform(inst->ball(), rng);
    const double D = bregman(cert, *inst, x);
    double mean = 0.0;
    for (std::size_t z = 0; z < weights.size(); ++z)
      mean += weights[z] * (inst->loss(z, x) - inst->loss(z, cert.xstar) - cert.g(z).dot(x - cert.xstar));
    worst_identity = std::max(worst_identity, std::abs(D - mean));
    min_D = std::min(min_D, D);
  }
  CheckOutcome out;
  out.pass = worst_identity <= 1e-12 && min_D >= -1e-9;
  out.detail = {{"max_identity_error", worst_identity}, {"min_D", min_D}, {"points", points}};
  return out;
}

CheckOutcome invariants_check(const nlohmann::json& c, std::uint64_t seed) {
  require_keys(c, {"type", "name", "instance", "probes", "seed"}, "invariants check");
  const InstancePtr inst = make_instance(c.at("instance"));
  const InvariantReport rep = check_invariants(*inst, c.value("probes", std::size_t{1000}), c.value("seed", seed));
  return {"", "", rep.pass(), rep.to_json()};
}

CheckOutcome concentration_check(const nlohmann::json& c, std::uint64_t seed, unsigned jobs,
                                 std::vector<ConcentrationReport>& reports) {
  require_keys(c, {"type", "name", "instance", "x", "n", "trials", "mode", "delta", "eps", "seed", "net_eps"},
               "concentration check");
  const InstancePtr inst = make_instance(c.at("instance"));
  const SolveReport pop = population_minimizer(*inst, 1e-6);
  const OptimalityCertificate cert = build_certificate(*inst, pop.point);
  ConcentrationOptions opts;
  opts.delta = c.value("delta", opts.delta);
  opts.eps = c.value("eps", opts.eps);
  opts.jobs = jobs;
  if (c.contains("net_eps")) opts.points = build_net(inst->ball(), c["net_eps"].get<double>()).points;
  const ConcentrationReport r =
      verify_concentration(*inst, cert, to_vector(c.at("x")), c.at("n").get<std::size_t>(),
                           c.value("trials", std::size_t{1000}), c.value("seed", seed),
                           parse_mode(c.at("mode").get<std::string>()), opts);
  reports.push_back(r);
  return {"", "", r.pass, r.to_json()};
}

CheckOutcome claims_check(const nlohmann::json& c, std::uint64_t seed, unsigned jobs) {
  require_keys(c, {"type", "name", "instance", "eps", "n", "trials", "seed", "net_eps"}, "claims check");
  const InstancePtr inst = make_instance(c.at("instance"));
  const double eps = c.at("eps").get<double>();
  const std::size_t n = c.at("n").get<std::size_t>();
  const std::size_t trials = c.value("trials", std::size_t{100});
  const std::uint64_t master = c.value("seed", seed);
  const SolveReport pop = population_minimizer(*inst, 1e-6);
  const OptimalityCertificate cert = build_certificate(*inst, pop.point);
  const Net net = build_net(inst->ball(), c.value("net_eps", eps / 6.0), kDefaultCandidateBudget, master);

  std::vector<ClaimTally> tallies(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    const Sample s = draw_sample(*inst, n, derive_seed(master, {t}));
    const NearErm worst = worst_near_erm(*inst, s, eps, net.points, pop, 1e-3);
    const auto candidates = near_erm_candidates(*inst, s, net.points, worst.erm.point, pop.point);
    check_conditional_claims(cert, *inst, s, candidates, eps, net.points, net.cover_radius, tallies[t]);
  });
  ClaimTally total;
  for (const ClaimTally& t : tallies) total.merge(t);
  return {"", "", total.total_violations() == 0, total.to_json()};
}

}  // namespace

bool SuiteResult::pass() const {
  for (const CheckOutcome& c : checks)
    if (!c.pass) return false;
  return true;
}

nlohmann::json SuiteResult::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const CheckOutcome& c : checks)
    list.push_back({{"name", c.name}, {"type", c.type}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"pass", pass()}, {"checks", list}};
}

std::string SuiteResult::concentration_csv() const {
  std::string csv = ConcentrationReport::csv_header() + "\n";
  for (const ConcentrationReport& r : concentration) csv += r.csv_row() + "\n";
  return csv;
}

SuiteResult run_checks(const nlohmann::json& config, std::optional<std::uint64_t> seed_override,
                       unsigned jobs, std::ostream* log) {
  if (!config.is_object()) throw ConfigError("verify config must be a JSON object");
  require_keys(config, {"seed", "checks", "output"}, "verify config");
  const std::uint64_t master = seed_override.value_or(config.value("seed", std::uint64_t{0}));
  SuiteResult suite;
  std::size_t index = 0;
  for (const auto& c : config.at("checks")) {
    if (!c.is_object()) throw ConfigError("each check must be a JSON object");
    const std::string type = c.at("type").get<std::string>();
    const std::uint64_t seed = derive_seed(master, {index});
    CheckOutcome out;
    if (type == "certificate") out = certificate_check(c);
    else if (type == "bregman_identity") out = bregman_identity_check(c, seed);
    else if (type == "invariants") out = invariants_check(c, seed);
    else if (type == "concentration") out = concentration_check(c, seed, jobs, suite.concentration);
    else if (type == "claims") out = claims_check(c, seed, jobs);
    else throw ConfigError("unknown check type '" + type + "'");
    out.type = type;
    std::ostringstream fallback;
    fallback << type << '#' << index;
    out.name = c.value("name", fallback.str());
    if (log) *log << (out.pass ? "PASS " : "FAIL ") << out.name << '\n';
    suite.checks.push_back(std::move(out));
    ++index;
  }
  return suite;
}

}  // namespace scolab::cli
