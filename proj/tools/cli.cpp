#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "checks.hpp"
#include "scolab/divergence.hpp"
#include "scolab/errors.hpp"
#include "scolab/families.hpp"
#include "scolab/net.hpp"
#include "scolab/rademacher.hpp"
#include "scolab/report.hpp"
#include "scolab/solver.hpp"
#include "scolab/sweep.hpp"
#include "scolab/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace scolab::cli {
namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool verbose = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file");
  app->add_option("--out", c.out, "output directory (default: $SCOLAB_OUT)");
  app->add_option("--seed", c.seed, "master seed, overrides the config");
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  app->add_flag("--verbose", c.verbose, "progress on stderr");
}

json load_config(const Common& c) {
  if (c.config.empty()) return json::object();
  std::ifstream in(c.config);
  if (!in) throw ConfigError("cannot read config file " + c.config);
  try {
    json j;
    in >> j;
    if (!j.is_object()) throw ConfigError(c.config + ": top level must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError(c.config + ": " + e.what());
  }
}

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where + " config");
}

json parse_inline(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("--") + what + ": " + e.what());
  }
}

Vector to_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> as_list(const Vector& v) { return {v.begin(), v.end()}; }

/// --out, then the config's "output", then $SCOLAB_OUT, then `fallback`.
std::optional<fs::path> output_dir(const Common& c, const json& cfg, std::optional<fs::path> fallback) {
  if (!c.out.empty()) return fs::path(c.out);
  if (cfg.contains("output")) return fs::path(cfg["output"].get<std::string>());
  if (const char* env = std::getenv("SCOLAB_OUT"); env && *env) return fs::path(env);
  return fallback;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_manifest(const fs::path& dir, const std::string& command, const json& cfg,
                    std::uint64_t seed, const std::vector<std::string>& outputs) {
  json manifest{{"tool", "scolab"},   {"version", kVersion}, {"command", command},
                {"config", cfg},      {"seeds", {{"master", seed}}}, {"outputs", outputs}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

void save_json(const fs::path& dir, const std::string& name, const json& j) {
  write_text_file(dir / name, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

struct InstanceArgs {
  std::string instance;
  std::size_t probes = 1000;
};

int cmd_instance(const Common& c, const InstanceArgs& a, std::ostream& out) {
  json cfg = load_config(c);
  require_keys(cfg, {"instance", "probes", "seed", "output"}, "instance");
  if (!a.instance.empty()) cfg["instance"] = parse_inline(a.instance, "instance");
  if (!cfg.contains("instance")) throw ConfigError("instance: no descriptor (use --instance or a config)");
  const std::uint64_t seed = c.seed.value_or(cfg.value("seed", std::uint64_t{0}));
  const InstancePtr inst = make_instance(cfg["instance"]);
  const InvariantReport rep = check_invariants(*inst, cfg.value("probes", a.probes), seed);

  json summary{{"label", inst->label()},
               {"ball", inst->ball().name()},
               {"dim", inst->ball().dim()},
               {"lipschitz", inst->lipschitz()},
               {"bound", inst->bound()},
               {"explicit_weights", inst->explicit_weights()},
               {"descriptor", inst->descriptor()},
               {"invariants", rep.to_json()}};
  if (auto x = inst->known_minimizer()) summary["known_minimizer"] = as_list(*x);
  out << summary.dump(2) << '\n';
  if (auto dir = output_dir(c, cfg, std::nullopt)) {
    ensure_dir(*dir);
    save_json(*dir, "instance.json", summary);
    write_manifest(*dir, "instance", cfg, seed, {"instance.json"});
  }
  return rep.pass() ? kOk : kVerificationFailed;
}

struct NetArgs {
  std::string family;
  int dim = 0;
  double p = 0.0, eps = 0.0;
  std::size_t budget = 0, probes = 0;
};

int cmd_net(const Common& c, const NetArgs& a, std::ostream& out) {
  json cfg = load_config(c);
  require_keys(cfg, {"ball", "dim", "p", "eps", "candidate_budget", "size_cap", "probes", "seed", "output"}, "net");
  if (!a.family.empty()) cfg["ball"] = a.family;
  if (a.dim > 0) cfg["dim"] = a.dim;
  if (a.p > 0) cfg["p"] = a.p;
  if (a.eps > 0) cfg["eps"] = a.eps;
  if (a.budget > 0) cfg["candidate_budget"] = a.budget;
  if (a.probes > 0) cfg["probes"] = a.probes;
  const std::uint64_t seed = c.seed.value_or(cfg.value("seed", std::uint64_t{0}));
  if (!cfg.contains("eps")) throw ConfigError("net: eps is required");
  const NormBall ball = NormBall::parse(cfg.value("ball", std::string("l2")), cfg.value("dim", 1), cfg.value("p", 2.0));
  Net net = build_net(ball, cfg["eps"].get<double>(), cfg.value("candidate_budget", kDefaultCandidateBudget), seed,
                      cfg.value("size_cap", kDefaultNetSizeCap));
  if (const std::size_t probes = cfg.value("probes", std::size_t{0}); probes > 0)
    net.measured_radius = measure_cover_radius(net, probes, derive_seed(seed, {1}));

  json summary{{"ball", ball.name()},          {"dim", ball.dim()},
               {"separation", net.separation}, {"cover_radius", net.cover_radius},
               {"points", net.points.size()},  {"packing_bound", packing_size_bound(ball.dim(), net.separation)}};
  if (!std::isnan(net.measured_radius)) summary["measured_radius"] = net.measured_radius;
  out << summary.dump(2) << '\n';
  const fs::path dir = *output_dir(c, cfg, fs::path("."));
  ensure_dir(dir);
  save_json(dir, "net.json", to_json(net));
  write_manifest(dir, "net", cfg, seed, {"net.json"});
  return kOk;
}

struct RadArgs {
  std::string family;
  int dim = 0;
  double p = 0.0;
  std::optional<double> inverse;
  std::optional<std::size_t> bound;
  std::string data;
  std::string method;
  std::size_t trials = 0;
};

int cmd_rad(const Common& c, const RadArgs& a, std::ostream& out) {
  json cfg = load_config(c);
  require_keys(cfg, {"ball", "dim", "p", "inverse", "bound", "data", "method", "trials", "seed", "output"}, "rad");
  if (!a.family.empty()) cfg["ball"] = a.family;
  if (a.dim > 0) cfg["dim"] = a.dim;
  if (a.p > 0) cfg["p"] = a.p;
  if (a.inverse) cfg["inverse"] = *a.inverse;
  if (a.bound) cfg["bound"] = *a.bound;
  if (!a.method.empty()) cfg["method"] = a.method;
  if (a.trials > 0) cfg["trials"] = a.trials;
  if (!a.data.empty()) {
    std::ifstream in(a.data);
    if (!in) throw ConfigError("cannot read data file " + a.data);
    try {
      cfg["data"] = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(a.data + ": " + e.what());
    }
  }
  const std::uint64_t seed = c.seed.value_or(cfg.value("seed", std::uint64_t{0}));
  const NormBall ball = NormBall::parse(cfg.value("ball", std::string("l2")), cfg.value("dim", 1), cfg.value("p", 2.0));

  json result;
  if (cfg.contains("inverse")) {
    const std::size_t n = rad_inverse(ball, cfg["inverse"].get<double>());
    out << n << '\n';
    result["inverse"] = n;
  }
  if (cfg.contains("bound")) {
    const double b = rad_upper_bound(ball, cfg["bound"].get<std::size_t>());
    out << json(b).dump() << '\n';
    result["bound"] = b;
  }
  if (cfg.contains("data")) {
    std::vector<Vector> S;
    for (const auto& row : cfg["data"]) S.push_back(to_vector(row));
    const std::string method = cfg.value("method", std::string(S.size() <= kMaxExactRademacher ? "exact" : "mc"));
    RadEstimate est;
    if (method == "exact") est = rad_exact(ball, S, c.jobs);
    else if (method == "mc") est = rad_mc(ball, S, cfg.value("trials", std::size_t{10000}), seed, c.jobs);
    else throw ConfigError("rad: method must be \"exact\" or \"mc\"");
    out << est.to_json().dump() << '\n';
    result["estimate"] = est.to_json();
  }
  if (result.empty()) throw ConfigError("rad: nothing to do (use --inverse, --bound or --data)");
  if (auto dir = output_dir(c, cfg, std::nullopt)) {
    ensure_dir(*dir);
    save_json(*dir, "rad.json", result);
    write_manifest(*dir, "rad", cfg, seed, {"rad.json"});
  }
  return kOk;
}

struct ErmArgs {
  std::string instance;
  std::size_t n = 0;
  std::optional<double> eps;
};

int cmd_erm(const Common& c, const ErmArgs& a, std::ostream& out) {
  json cfg = load_config(c);
  require_keys(cfg, {"instance", "n", "seed", "tol", "eps", "net_eps", "premise", "output"}, "erm");
  if (!a.instance.empty()) cfg["instance"] = parse_inline(a.instance, "instance");
  if (a.n > 0) cfg["n"] = a.n;
  if (a.eps) cfg["eps"] = *a.eps;
  if (!cfg.contains("instance") || !cfg.contains("n")) throw ConfigError("erm: instance and n are required");
  const std::uint64_t seed = c.seed.value_or(cfg.value("seed", std::uint64_t{0}));
  const double tol = cfg.value("tol", 1e-3);
  const InstancePtr inst = make_instance(cfg["instance"]);
  const Sample s = draw_sample(*inst, cfg["n"].get<std::size_t>(), seed);

  json result{{"sample", {{"n", s.size()}, {"seed", s.seed}}},
              {"erm", minimize_empirical(*inst, s, tol).to_json()}};
  const SolveReport pop = population_minimizer(*inst, tol);
  result["population"] = pop.to_json();
  if (cfg.contains("eps")) {
    const double eps = cfg["eps"].get<double>();
    std::vector<Vector> net;
    if (cfg.contains("net_eps")) net = build_net(inst->ball(), cfg["net_eps"].get<double>(), kDefaultCandidateBudget, seed).points;
    const std::string premise = cfg.value("premise", std::string("minimizer"));
    if (premise != "minimizer" && premise != "empirical_min") throw ConfigError("erm: premise must be minimizer or empirical_min");
    result["worst_near_erm"] =
        worst_near_erm(*inst, s, eps, net, pop, tol,
                       premise == "minimizer" ? Premise::AtMinimizer : Premise::AtEmpiricalMin)
            .to_json();
  }
  out << result.dump(2) << '\n';
  if (auto dir = output_dir(c, cfg, std::nullopt)) {
    ensure_dir(*dir);
    save_json(*dir, "erm.json", result);
    write_manifest(*dir, "erm", cfg, seed, {"erm.json"});
  }
  return kOk;
}

struct DivergenceArgs {
  std::string instance;
  std::string x;
  std::size_t n = 0;
};

int cmd_divergence(const Common& c, const DivergenceArgs& a, std::ostream& out) {
  json cfg = load_config(c);
  require_keys(cfg, {"instance", "x", "n", "seed", "net_eps", "output"}, "divergence");
  if (!a.instance.empty()) cfg["instance"] = parse_inline(a.instance, "instance");
  if (!a.x.empty()) cfg["x"] = parse_inline(a.x, "x");
  if (a.n > 0) cfg["n"] = a.n;
  if (!cfg.contains("instance") || !cfg.contains("x") || !cfg.contains("n"))
    throw ConfigError("divergence: instance, x and n are required");
  const std::uint64_t seed = c.seed.value_or(cfg.value("seed", std::uint64_t{0}));
  const InstancePtr inst = make_instance(cfg["instance"]);
  const SolveReport pop = population_minimizer(*inst, 1e-6);
  const OptimalityCertificate cert = build_certificate(*inst, pop.point);
  const Sample s = draw_sample(*inst, cfg["n"].get<std::size_t>(), seed);
  std::vector<Vector> net;
  if (cfg.contains("net_eps")) net = build_net(inst->ball(), cfg["net_eps"].get<double>(), kDefaultCandidateBudget, seed).points;
  const json result = divergence_report(cert, *inst, s, to_vector(cfg["x"]), net).to_json();
  out << result.dump(2) << '\n';
  if (auto dir = output_dir(c, cfg, std::nullopt)) {
    ensure_dir(*dir);
    save_json(*dir, "divergence.json", result);
    write_manifest(*dir, "divergence", cfg, seed, {"divergence.json"});
  }
  return kOk;
}

int cmd_verify(const Common& c, std::ostream& out, std::ostream& err) {
  if (c.config.empty()) throw ConfigError("verify: --config is required (see configs/verify.json)");
  const json cfg = load_config(c);
  const SuiteResult suite = run_checks(cfg, c.seed, c.jobs, c.verbose ? &err : nullptr);
  for (const CheckOutcome& check : suite.checks)
    out << (check.pass ? "PASS " : "FAIL ") << check.name << '\n';
  out << (suite.pass() ? "all checks passed" : "verification FAILED") << '\n';
  if (auto dir = output_dir(c, cfg, std::nullopt)) {
    ensure_dir(*dir);
    save_json(*dir, "verify.json", suite.to_json());
    write_text_file(*dir / "verify.csv", suite.concentration_csv());
    write_manifest(*dir, "verify", cfg, c.seed.value_or(cfg.value("seed", std::uint64_t{0})),
                   {"verify.json", "verify.csv"});
  }
  return suite.pass() ? kOk : kVerificationFailed;
}

int cmd_sweep(const Common& c, std::ostream& out, std::ostream& err) {
  if (c.config.empty()) throw ConfigError("sweep: --config is required");
  const json raw = load_config(c);
  SweepConfig cfg = SweepConfig::from_json(raw);
  if (c.seed) cfg.seed = *c.seed;
  cfg.jobs = c.jobs;
  const fs::path dir = *output_dir(c, raw, fs::path("."));
  if (c.verbose) err << "sweep: writing to " << dir.string() << '\n';
  const SweepResult result = run_sweep(cfg);
  const ReportFiles files = emit_report(result, dir);
  write_manifest(dir, "sweep", cfg.to_json(), cfg.seed, {"results.json", "results.csv", "plots.svg"});

  out << "cells: " << result.cells.size() << '\n';
  for (const ThresholdResult& t : result.thresholds) {
    out << "d=" << t.d << " eps=" << json(t.eps).dump() << " n*="
        << (t.erm.resolved ? std::to_string(t.erm.n_star) : std::string("unresolved"));
    if (t.uniform)
      out << " n_uc=" << (t.uniform->resolved ? std::to_string(t.uniform->n_star) : std::string("unresolved"));
    out << '\n';
  }
  for (const ScalingFit& f : result.fits)
    out << "fit " << f.series << " vs " << f.axis << ": exponent " << json(f.exponent).dump() << '\n';
  out << "claim violations: " << result.claims.total_violations() << '\n';
  out << "wrote " << files.json.string() << '\n';
  return kOk;
}

int cmd_report(const Common& c, const std::string& input, std::ostream& out) {
  fs::path path = input;
  if (path.empty()) {
    const auto dir = output_dir(c, json::object(), fs::path("."));
    path = *dir / "results.json";
  }
  const ReportFiles files = regenerate_report(path);
  out << "wrote " << files.csv.string() << " and " << files.svg.string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"scolab: stochastic convex optimization experiments", "scolab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common common;
  InstanceArgs instance_args;
  NetArgs net_args;
  RadArgs rad_args;
  ErmArgs erm_args;
  DivergenceArgs div_args;
  std::string report_input;

  auto* instance = app.add_subcommand("instance", "describe an instance and run its invariant battery");
  add_common(instance, common);
  instance->add_option("--instance", instance_args.instance, "instance descriptor as inline JSON");
  instance->add_option("--probes", instance_args.probes, "probe points for the invariant battery");

  auto* net = app.add_subcommand("net", "build and save a greedy packing net");
  add_common(net, common);
  net->add_option("--family", net_args.family, "l1, l2, linf or lp");
  net->add_option("--dim", net_args.dim);
  net->add_option("--p", net_args.p, "exponent for --family lp");
  net->add_option("--eps", net_args.eps, "separation");
  net->add_option("--budget", net_args.budget, "candidate budget");
  net->add_option("--probes", net_args.probes, "points for the measured cover radius");

  auto* rad = app.add_subcommand("rad", "Rademacher complexity estimates");
  add_common(rad, common);
  rad->add_option("--family", rad_args.family, "l1, l2, linf or lp");
  rad->add_option("--dim", rad_args.dim);
  rad->add_option("--p", rad_args.p);
  rad->add_option("--inverse", rad_args.inverse, "print the smallest n with bound(n) < EPS");
  rad->add_option("--bound", rad_args.bound, "print the closed-form bound at N");
  rad->add_option("--data", rad_args.data, "JSON file with a list of dual vectors");
  rad->add_option("--method", rad_args.method, "exact or mc");
  rad->add_option("--trials", rad_args.trials, "Monte-Carlo trials");

  auto* erm = app.add_subcommand("erm", "solve one (instance, sample)");
  add_common(erm, common);
  erm->add_option("--instance", erm_args.instance, "instance descriptor as inline JSON");
  erm->add_option("--n", erm_args.n, "sample size");
  erm->add_option("--eps", erm_args.eps, "also search the worst eps-near ERM");

  auto* divergence = app.add_subcommand("divergence", "certificate and divergences at a point");
  add_common(divergence, common);
  divergence->add_option("--instance", div_args.instance, "instance descriptor as inline JSON");
  divergence->add_option("--x", div_args.x, "point as a JSON array");
  divergence->add_option("--n", div_args.n, "sample size");

  auto* verify = app.add_subcommand("verify", "run conditional-claim and concentration checks");
  add_common(verify, common);
  auto* sweep = app.add_subcommand("sweep", "run a sweep from a config file");
  add_common(sweep, common);
  auto* report = app.add_subcommand("report", "regenerate CSV/SVG from results.json");
  add_common(report, common);
  report->add_option("input", report_input, "results.json (default: <out>/results.json)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kConfigError;
  }

  try {
    if (instance->parsed()) return cmd_instance(common, instance_args, out);
    if (net->parsed()) return cmd_net(common, net_args, out);
    if (rad->parsed()) return cmd_rad(common, rad_args, out);
    if (erm->parsed()) return cmd_erm(common, erm_args, out);
    if (divergence->parsed()) return cmd_divergence(common, div_args, out);
    if (verify->parsed()) return cmd_verify(common, out, err);
    if (sweep->parsed()) return cmd_sweep(common, out, err);
    if (report->parsed()) return cmd_report(common, report_input, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InputError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const CapacityError& e) {
    err << "capacity: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << '\n';
    return kConfigError;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kVerificationFailed;
  }
  err << app.help();
  return kConfigError;
}

}  // namespace scolab::cli
