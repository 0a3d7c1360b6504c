#include "scolab/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "scolab/errors.hpp"
#include "scolab/families.hpp"
#include "scolab/parallel.hpp"
#include "scolab/rademacher.hpp"

namespace scolab {
namespace {

constexpr std::uint64_t kUniformStream = 0x756e69;  // separates uniform-deviation seeds
constexpr std::uint64_t kNetStream = 0x6e6574;

std::optional<std::size_t> theorem_bound_if_defined(int d, double eps) {
  if (eps > 0.0 && eps < 1.0) return theorem_sample_bound(d, eps);
  return std::nullopt;
}

nlohmann::json optional_json(const std::optional<std::size_t>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<std::size_t> optional_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::size_t>();
}

std::string premise_name(Premise p) {
  return p == Premise::AtMinimizer ? "minimizer" : "empirical_min";
}

CellResult cell_header(const CellSetup& cell, std::size_t n, const char* kind) {
  CellResult r;
  r.d = cell.d;
  r.eps = cell.eps;
  r.eps_index = cell.eps_index;
  r.n = n;
  r.kind = kind;
  r.n0_theorem = theorem_bound_if_defined(cell.d, cell.eps);
  if (!cell.skip_reason.empty()) {
    r.skipped = true;
    r.skip_reason = cell.skip_reason;
  }
  return r;
}

void finish_cell(CellResult& r) {
  r.trials = r.records.size();
  r.failures = 0;
  for (const TrialRecord& t : r.records) r.failures += t.failure ? 1 : 0;
  r.freq = static_cast<double>(r.failures) / static_cast<double>(r.trials);
  std::tie(r.ci_lo, r.ci_hi) = wilson_interval(r.failures, r.trials);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::size_t theorem_sample_bound(int d, double eps) {
  if (d < 1) throw InputError("theorem_sample_bound needs d >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("theorem_sample_bound needs eps in (0, 1)");
  const double n0 = 3.0 * d * std::log(40.0 / eps) / eps + 40.0 / (eps * eps);
  return static_cast<std::size_t>(std::ceil(n0));
}

std::size_t theorem_sample_bound_general(int d, double eps, double delta, double L, double c,
                                         const NormBall& ball) {
  if (d < 1) throw InputError("theorem_sample_bound_general needs d >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("theorem_sample_bound_general needs eps in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("theorem_sample_bound_general needs delta in (0, 1)");
  if (!(L > 0.0 && c > 0.0)) throw InputError("theorem_sample_bound_general needs L, c > 0");
  const double first = 12.0 * c * d / eps * std::log(3.0 * L / eps);
  const double middle = static_cast<double>(rad_inverse(ball, std::min(1.0, eps / (2.0 * L))));
  const double last = 8.0 * c * c / (eps * eps) * std::log(4.0 / delta);
  return static_cast<std::size_t>(std::ceil(first + middle + last));
}

std::pair<double, double> wilson_interval(std::size_t failures, std::size_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(failures) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
  return {std::clamp(std::min(center - half, p), 0.0, 1.0), std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

std::vector<double> isotonic_nonincreasing(const std::vector<double>& values) {
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  for (double v : values) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() < blocks.back().mean()) {
      Block last = blocks.back();
      blocks.pop_back();
      blocks.back().sum += last.sum;
      blocks.back().count += last.count;
    }
  }
  std::vector<double> out;
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean());
  return out;
}

// --------------------------------------------------------------------------
// Config

void SweepConfig::validate() const {
  if (!family.is_object() || !family.contains("family")) throw ConfigError("sweep config needs a family descriptor");
  if (d_grid.empty()) throw ConfigError("d_grid must be nonempty");
  if (eps_grid.empty()) throw ConfigError("eps_grid must be nonempty");
  for (int d : d_grid)
    if (d < 1) throw ConfigError("d_grid entries must be >= 1");
  for (double e : eps_grid)
    if (!(e > 0.0)) throw ConfigError("eps_grid entries must be positive");
  for (std::size_t n : n_grid)
    if (n < 1) throw ConfigError("n_grid entries must be >= 1");
  if (trials < 50) throw ConfigError("trials must be >= 50");
  if (!(multiplier > 1.0)) throw ConfigError("multiplier must exceed 1");
  if (!(target > 0.0 && target <= 1.0)) throw ConfigError("target must lie in (0, 1]");
  if (!(solver_tol > 0.0)) throw ConfigError("solver_tol must be positive");
  if (max_n < 1) throw ConfigError("max_n must be >= 1");
}

nlohmann::json SweepConfig::to_json() const {
  return {{"family", family},
          {"d_grid", d_grid},
          {"eps_grid", eps_grid},
          {"n_grid", n_grid},
          {"trials", trials},
          {"multiplier", multiplier},
          {"target", target},
          {"seed", seed},
          {"net_mode", net_mode == NetMode::Auto ? "auto" : "none"},
          {"premise", premise_name(premise)},
          {"uniform_convergence", uniform_convergence},
          {"check_claims", check_claims},
          {"solver_tol", solver_tol},
          {"max_n", max_n}};
}

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{
      "family", "d_grid", "eps_grid", "n_grid", "trials", "multiplier", "target", "seed", "output",
      "net_mode", "premise", "uniform_convergence", "check_claims", "solver_tol", "max_n", "jobs"};
  if (!j.is_object()) throw ConfigError("sweep config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in sweep config");
  SweepConfig c;
  try {
    c.family = j.at("family");
    c.d_grid = j.at("d_grid").get<std::vector<int>>();
    c.eps_grid = j.at("eps_grid").get<std::vector<double>>();
    c.n_grid = j.value("n_grid", std::vector<std::size_t>{});
    c.trials = j.value("trials", c.trials);
    c.multiplier = j.value("multiplier", c.multiplier);
    c.target = j.value("target", c.target);
    c.seed = j.value("seed", c.seed);
    c.output = j.value("output", c.output);
    const std::string net = j.value("net_mode", std::string("auto"));
    if (net == "auto") c.net_mode = NetMode::Auto;
    else if (net == "none") c.net_mode = NetMode::None;
    else throw ConfigError("net_mode must be \"auto\" or \"none\"");
    const std::string premise = j.value("premise", std::string("minimizer"));
    if (premise == "minimizer") c.premise = Premise::AtMinimizer;
    else if (premise == "empirical_min") c.premise = Premise::AtEmpiricalMin;
    else throw ConfigError("premise must be \"minimizer\" or \"empirical_min\"");
    c.uniform_convergence = j.value("uniform_convergence", c.uniform_convergence);
    c.check_claims = j.value("check_claims", c.check_claims);
    c.solver_tol = j.value("solver_tol", c.solver_tol);
    c.max_n = j.value("max_n", c.max_n);
    c.jobs = j.value("jobs", c.jobs);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed sweep config: ") + e.what());
  }
  c.validate();
  return c;
}

InstancePtr instance_for(const nlohmann::json& family, int d) {
  nlohmann::json j = family;
  const std::string name = j.value("family", std::string());
  if (name == "hard" && !j.contains("directions")) {
    j["d"] = d;
    if (!j.contains("m") || j["m"] == "auto") {
      const int exponent = (d + 3) / 4;
      if (exponent > 6) throw CapacityError("m = 2^ceil(d/4) exceeds 64 directions");
      j["m"] = 1 << exponent;
    }
    if (!j.contains("seed")) j["seed"] = 0;
  } else if (name == "quadratic") {
    if (j.contains("dim") && j["dim"] != d) throw InputError("quadratic descriptor dim differs from the grid d");
    j["dim"] = d;
  } else if ((name == "coin" || name == "appendix") && d != 1) {
    throw InputError(name + " family is one-dimensional");
  }
  return make_instance(j);
}

// --------------------------------------------------------------------------
// Records

nlohmann::json TrialRecord::to_json() const {
  return {{"trial", trial}, {"seed", seed}, {"pop_excess", pop_excess}, {"failure", failure}};
}

TrialRecord TrialRecord::from_json(const nlohmann::json& j) {
  TrialRecord t;
  t.trial = j.at("trial").get<std::size_t>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.pop_excess = j.at("pop_excess").get<double>();
  t.failure = j.at("failure").get<bool>();
  return t;
}

nlohmann::json CellResult::to_json() const {
  nlohmann::json records_json = nlohmann::json::array();
  for (const TrialRecord& t : records) records_json.push_back(t.to_json());
  return {{"d", d},
          {"eps", eps},
          {"eps_index", eps_index},
          {"n", n},
          {"kind", kind},
          {"trials", trials},
          {"failures", failures},
          {"freq", freq},
          {"ci_lo", ci_lo},
          {"ci_hi", ci_hi},
          {"n0_theorem", optional_json(n0_theorem)},
          {"skipped", skipped},
          {"skip_reason", skip_reason},
          {"claims", claims.to_json()},
          {"records", records_json}};
}

CellResult CellResult::from_json(const nlohmann::json& j) {
  CellResult c;
  c.d = j.at("d").get<int>();
  c.eps = j.at("eps").get<double>();
  c.eps_index = j.at("eps_index").get<std::size_t>();
  c.n = j.at("n").get<std::size_t>();
  c.kind = j.at("kind").get<std::string>();
  c.trials = j.at("trials").get<std::size_t>();
  c.failures = j.at("failures").get<std::size_t>();
  c.freq = j.at("freq").get<double>();
  c.ci_lo = j.at("ci_lo").get<double>();
  c.ci_hi = j.at("ci_hi").get<double>();
  c.n0_theorem = optional_from(j.at("n0_theorem"));
  c.skipped = j.at("skipped").get<bool>();
  c.skip_reason = j.at("skip_reason").get<std::string>();
  c.claims = ClaimTally::from_json(j.at("claims"));
  for (const auto& r : j.at("records")) c.records.push_back(TrialRecord::from_json(r));
  return c;
}

nlohmann::json ThresholdSearch::to_json() const {
  nlohmann::json probes_json = nlohmann::json::array();
  for (const ThresholdProbe& p : probes)
    probes_json.push_back({{"n", p.n}, {"freq", p.freq}, {"smoothed", p.smoothed}});
  return {{"n_star", n_star}, {"resolved", resolved}, {"lo", lo}, {"hi", hi}, {"probes", probes_json}};
}

ThresholdSearch ThresholdSearch::from_json(const nlohmann::json& j) {
  ThresholdSearch s;
  s.n_star = j.at("n_star").get<std::size_t>();
  s.resolved = j.at("resolved").get<bool>();
  s.lo = j.at("lo").get<std::size_t>();
  s.hi = j.at("hi").get<std::size_t>();
  for (const auto& p : j.at("probes"))
    s.probes.push_back({p.at("n").get<std::size_t>(), p.at("freq").get<double>(), p.at("smoothed").get<double>()});
  return s;
}

nlohmann::json ThresholdResult::to_json() const {
  return {{"d", d},
          {"eps", eps},
          {"target", target},
          {"n0_theorem", optional_json(n0_theorem)},
          {"erm", erm.to_json()},
          {"uniform", uniform ? uniform->to_json() : nlohmann::json(nullptr)}};
}

ThresholdResult ThresholdResult::from_json(const nlohmann::json& j) {
  ThresholdResult t;
  t.d = j.at("d").get<int>();
  t.eps = j.at("eps").get<double>();
  t.target = j.at("target").get<double>();
  t.n0_theorem = optional_from(j.at("n0_theorem"));
  t.erm = ThresholdSearch::from_json(j.at("erm"));
  if (!j.at("uniform").is_null()) t.uniform = ThresholdSearch::from_json(j.at("uniform"));
  return t;
}

nlohmann::json ScalingFit::to_json() const {
  return {{"series", series},       {"axis", axis},         {"fixed", fixed},
          {"exponent", exponent},   {"intercept", intercept}, {"residual", residual},
          {"points", points}};
}

ScalingFit ScalingFit::from_json(const nlohmann::json& j) {
  ScalingFit f;
  f.series = j.at("series").get<std::string>();
  f.axis = j.at("axis").get<std::string>();
  f.fixed = j.at("fixed").get<double>();
  f.exponent = j.at("exponent").get<double>();
  f.intercept = j.at("intercept").get<double>();
  f.residual = j.at("residual").get<double>();
  f.points = j.at("points").get<std::size_t>();
  return f;
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json cells_json = nlohmann::json::array(), thresholds_json = nlohmann::json::array(),
                 fits_json = nlohmann::json::array();
  for (const CellResult& c : cells) cells_json.push_back(c.to_json());
  for (const ThresholdResult& t : thresholds) thresholds_json.push_back(t.to_json());
  for (const ScalingFit& f : fits) fits_json.push_back(f.to_json());
  return {{"schema_version", schema_version}, {"config", config},   {"cells", cells_json},
          {"thresholds", thresholds_json},    {"fits", fits_json}, {"claims", claims.to_json()}};
}

SweepResult SweepResult::from_json(const nlohmann::json& j) {
  SweepResult r;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kSweepSchemaVersion) {
      std::ostringstream msg;
      msg << "results schema version " << r.schema_version << " is not supported (expected "
          << kSweepSchemaVersion << ")";
      throw ConfigError(msg.str());
    }
    r.config = j.at("config");
    for (const auto& c : j.at("cells")) r.cells.push_back(CellResult::from_json(c));
    for (const auto& t : j.at("thresholds")) r.thresholds.push_back(ThresholdResult::from_json(t));
    for (const auto& f : j.at("fits")) r.fits.push_back(ScalingFit::from_json(f));
    r.claims = ClaimTally::from_json(j.at("claims"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed results document: ") + e.what());
  }
  return r;
}

// --------------------------------------------------------------------------
// Search

ThresholdSearch search_threshold(const std::function<double(std::size_t)>& freq_at, double target,
                                 std::size_t max_n) {
  std::map<std::size_t, double> measured;
  ThresholdSearch out;
  auto smoothed_at = [&](std::size_t n) {
    std::vector<double> values;
    std::size_t pos = 0, i = 0;
    for (const auto& [m, f] : measured) {
      if (m == n) pos = i;
      values.push_back(f);
      ++i;
    }
    return isotonic_nonincreasing(values)[pos];
  };
  auto probe = [&](std::size_t n) {
    measured.emplace(n, freq_at(n));
    return smoothed_at(n) <= target;
  };

  std::size_t lo = 0, hi = 0;
  for (std::size_t n = 1;; n *= 2) {
    n = std::min(n, max_n);
    if (probe(n)) {
      hi = n;
      break;
    }
    lo = n;
    if (n == max_n) break;
  }
  if (hi != 0) {
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (probe(mid)) hi = mid;
      else lo = mid;
    }
  }

  std::vector<double> values;
  for (const auto& [n, f] : measured) values.push_back(f);
  const std::vector<double> smooth = isotonic_nonincreasing(values);
  std::size_t i = 0;
  for (const auto& [n, f] : measured) {
    out.probes.push_back({n, f, smooth[i]});
    if (!out.resolved && smooth[i] <= target) {
      out.resolved = true;
      out.n_star = n;
    }
    ++i;
  }
  out.lo = 0;
  for (const ThresholdProbe& p : out.probes)
    if (p.smoothed > target && (!out.resolved || p.n < out.n_star)) out.lo = p.n;
  out.hi = out.resolved ? out.n_star : max_n;
  return out;
}

// --------------------------------------------------------------------------
// Cells

CellSetup prepare_cell(const SweepConfig& cfg, int d, std::size_t eps_index) {
  CellSetup cell;
  cell.d = d;
  cell.eps_index = eps_index;
  cell.eps = cfg.eps_grid.at(eps_index);
  try {
    cell.inst = instance_for(cfg.family, d);
    cell.population = population_minimizer(*cell.inst, cfg.solver_tol);
    if (cfg.net_mode == NetMode::Auto) {
      cell.net = build_net(cell.inst->ball(), cell.eps / 6.0, kDefaultCandidateBudget,
                           derive_seed(cfg.seed, {static_cast<std::uint64_t>(d), eps_index, kNetStream}));
      cell.net->cover_radius = cell.eps / 3.0;
    }
  } catch (const CapacityError& e) {
    cell.skip_reason = e.what();
    return cell;
  }
  if (cfg.check_claims) {
    try {
      cell.cert = build_certificate(*cell.inst, cell.population.point);
    } catch (const Error&) {
      cell.cert.reset();  // claims are not evaluated for this cell
    }
  }
  if (cell.net) {
    cell.uc_points = cell.net->points;
  } else {
    cell.uc_points = cell.inst->structured_points();
  }
  cell.uc_points.push_back(cell.population.point);
  return cell;
}

CellResult failure_probability(const SweepConfig& cfg, const CellSetup& cell, std::size_t n) {
  CellResult r = cell_header(cell, n, "erm");
  if (r.skipped) return r;
  const Instance& inst = *cell.inst;
  const std::span<const Vector> net =
      cell.net ? std::span<const Vector>(cell.net->points) : std::span<const Vector>();
  const std::optional<double> radius =
      cell.net ? std::optional<double>(cell.net->cover_radius) : std::nullopt;

  r.records.resize(cfg.trials);
  std::vector<ClaimTally> tallies(cfg.trials);
  parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) {
    const auto start = std::chrono::steady_clock::now();
    TrialRecord& rec = r.records[t];
    rec.trial = t;
    rec.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(cell.d), cell.eps_index, n, t});
    const Sample s = draw_sample(inst, n, rec.seed);
    const NearErm worst = worst_near_erm(inst, s, cell.eps, net, cell.population, cfg.solver_tol, cfg.premise);
    rec.pop_excess = worst.pop_excess;
    rec.failure = worst.pop_excess > cfg.multiplier * cell.eps;
    if (cell.cert) {
      const auto candidates = near_erm_candidates(inst, s, net, worst.erm.point, cell.population.point);
      check_conditional_claims(*cell.cert, inst, s, candidates, cell.eps, net, radius, tallies[t]);
    }
    rec.wall_ms = elapsed_ms(start);
  });
  for (const ClaimTally& t : tallies) r.claims.merge(t);
  finish_cell(r);
  return r;
}

CellResult uniform_deviation_probability(const SweepConfig& cfg, const CellSetup& cell,
                                         std::size_t n) {
  CellResult r = cell_header(cell, n, "uniform");
  if (r.skipped) return r;
  const Instance& inst = *cell.inst;
  std::vector<double> F(cell.uc_points.size());
  for (std::size_t i = 0; i < F.size(); ++i) F[i] = inst.expected_loss(cell.uc_points[i]);

  r.records.resize(cfg.trials);
  parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) {
    const auto start = std::chrono::steady_clock::now();
    TrialRecord& rec = r.records[t];
    rec.trial = t;
    rec.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(cell.d), cell.eps_index, n, t, kUniformStream});
    const OutcomeCounts counts = count_outcomes(draw_sample(inst, n, rec.seed));
    double worst = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i)
      worst = std::max(worst, std::abs(inst.mean_loss(counts, cell.uc_points[i]) - F[i]));
    rec.pop_excess = worst;
    rec.failure = worst > cell.eps;
    rec.wall_ms = elapsed_ms(start);
  });
  finish_cell(r);
  return r;
}

ThresholdSearch sample_threshold(const SweepConfig& cfg, const CellSetup& cell, double target,
                                 std::vector<CellResult>* cells) {
  if (!(target > 0.0 && target <= 1.0)) throw InputError("target must lie in (0, 1]");
  if (!cell.skip_reason.empty()) return ThresholdSearch{0, false, 0, cfg.max_n, {}};
  return search_threshold(
      [&](std::size_t n) {
        CellResult r = failure_probability(cfg, cell, n);
        const double f = r.freq;
        if (cells) cells->push_back(std::move(r));
        return f;
      },
      target, cfg.max_n);
}

ThresholdSearch uniform_convergence_threshold(const SweepConfig& cfg, const CellSetup& cell,
                                              std::vector<CellResult>* cells) {
  if (!cell.skip_reason.empty()) return ThresholdSearch{0, false, 0, cfg.max_n, {}};
  return search_threshold(
      [&](std::size_t n) {
        CellResult r = uniform_deviation_probability(cfg, cell, n);
        const double f = r.freq;
        if (cells) cells->push_back(std::move(r));
        return f;
      },
      0.25, cfg.max_n);
}

ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("fit_scaling needs matching x and y");
  if (x.size() < 3) throw InputError("fit_scaling needs at least 3 points");
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw InputError("fit_scaling needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= k, my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]) - mx, ly = std::log(y[i]) - my;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  if (sxx == 0.0) throw InputError("fit_scaling needs at least two distinct x values");
  ScalingFit f;
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = std::log(y[i]) - (f.intercept + f.exponent * std::log(x[i]));
    ss += e * e;
  }
  f.residual = std::sqrt(ss / k);
  f.points = x.size();
  return f;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepResult result;
  result.config = cfg.to_json();

  for (int d : cfg.d_grid) {
    for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
      const CellSetup cell = prepare_cell(cfg, d, e);
      if (!cfg.n_grid.empty()) {
        for (std::size_t n : cfg.n_grid) {
          result.cells.push_back(failure_probability(cfg, cell, n));
          if (cfg.uniform_convergence) result.cells.push_back(uniform_deviation_probability(cfg, cell, n));
        }
        continue;
      }
      ThresholdResult tr;
      tr.d = d;
      tr.eps = cell.eps;
      tr.target = cfg.target;
      tr.n0_theorem = theorem_bound_if_defined(d, cell.eps);
      tr.erm = sample_threshold(cfg, cell, cfg.target, &result.cells);
      if (cfg.uniform_convergence) tr.uniform = uniform_convergence_threshold(cfg, cell, &result.cells);
      result.thresholds.push_back(std::move(tr));
    }
  }

  std::stable_sort(result.cells.begin(), result.cells.end(), [](const CellResult& a, const CellResult& b) {
    return std::tie(a.kind, a.d, a.eps_index, a.n) < std::tie(b.kind, b.d, b.eps_index, b.n);
  });
  for (const CellResult& c : result.cells)
    if (c.kind == "erm") result.claims.merge(c.claims);

  auto add_fits = [&](const char* series, auto pick) {
    for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
      std::vector<double> x, y;
      for (const ThresholdResult& t : result.thresholds) {
        const ThresholdSearch* s = pick(t);
        if (t.eps == cfg.eps_grid[e] && s && s->resolved) {
          x.push_back(t.d);
          y.push_back(static_cast<double>(s->n_star));
        }
      }
      if (std::set<double>(x.begin(), x.end()).size() >= 3) {
        ScalingFit f = fit_scaling(x, y);
        f.series = series, f.axis = "d", f.fixed = cfg.eps_grid[e];
        result.fits.push_back(f);
      }
    }
    for (int d : cfg.d_grid) {
      std::vector<double> x, y;
      for (const ThresholdResult& t : result.thresholds) {
        const ThresholdSearch* s = pick(t);
        if (t.d == d && s && s->resolved) {
          x.push_back(1.0 / t.eps);
          y.push_back(static_cast<double>(s->n_star));
        }
      }
      if (std::set<double>(x.begin(), x.end()).size() >= 3) {
        ScalingFit f = fit_scaling(x, y);
        f.series = series, f.axis = "inv_eps", f.fixed = d;
        result.fits.push_back(f);
      }
    }
  };
  add_fits("erm", [](const ThresholdResult& t) { return &t.erm; });
  add_fits("uniform", [](const ThresholdResult& t) { return t.uniform ? &*t.uniform : nullptr; });
  return result;
}

}  // namespace scolab
