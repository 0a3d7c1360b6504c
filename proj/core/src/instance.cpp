#include "scolab/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "scolab/errors.hpp"

namespace scolab {

OutcomeCounts count_outcomes(const Sample& s) {
  std::vector<Outcome> sorted = s.outcomes;
  std::sort(sorted.begin(), sorted.end());
  OutcomeCounts counts;
  counts.total = sorted.size();
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    counts.entries.emplace_back(sorted[i], j - i);
    i = j;
  }
  return counts;
}

Instance::Instance(NormBall ball, double lipschitz, double bound, std::string label,
                   std::vector<double> weights)
    : ball_(ball),
      lipschitz_(lipschitz),
      bound_(bound),
      label_(std::move(label)),
      weights_(std::move(weights)) {
  if (weights_.empty()) return;
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw InputError("outcome weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("outcome weights must sum to 1");
  cumulative_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
}

std::vector<Vector> Instance::subdifferential_extremes(Outcome, const Vector&) const {
  return {};
}

std::size_t Instance::outcome_count() const {
  if (!explicit_weights()) throw UnsupportedError(label_ + ": outcome space is implicit");
  return weights_.size();
}

Outcome Instance::draw(Rng& rng) const {
  const double u = uniform01(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  // Skip trailing zero-weight outcomes that share the final cumulative value.
  std::size_t k = std::min<std::size_t>(it - cumulative_.begin(), weights_.size() - 1);
  while (weights_[k] == 0.0 && k > 0) --k;
  return k;
}

double Instance::expected_loss(const Vector& x) const {
  if (!explicit_weights()) throw UnsupportedError(label_ + ": no closed-form population loss");
  double acc = 0.0;
  for (std::size_t z = 0; z < weights_.size(); ++z)
    if (weights_[z] != 0.0) acc += weights_[z] * loss(z, x);
  return acc;
}

Vector Instance::expected_subgradient(const Vector& x) const {
  if (!explicit_weights())
    throw UnsupportedError(label_ + ": no closed-form population subgradient");
  Vector acc = Vector::Zero(ball_.dim());
  for (std::size_t z = 0; z < weights_.size(); ++z)
    if (weights_[z] != 0.0) acc += weights_[z] * subgradient(z, x);
  return acc;
}

double Instance::mean_loss(const OutcomeCounts& counts, const Vector& x) const {
  double acc = 0.0;
  for (const auto& [z, k] : counts.entries) acc += static_cast<double>(k) * loss(z, x);
  return acc / static_cast<double>(counts.total);
}

std::optional<Vector> Instance::common_subgradient(const Vector&) const { return std::nullopt; }

namespace {

void check_in_domain(const Instance& inst, const Vector& x) {
  if (x.size() != inst.ball().dim()) throw InputError("point has the wrong dimension");
  const double r = norm_eval(inst.ball(), x);
  if (r > 1.0 + 1e-9) {
    std::ostringstream msg;
    msg << "point with norm " << r << " lies outside the unit ball";
    throw InputError(msg.str());
  }
}

}  // namespace

double population_loss(const Instance& inst, const Vector& x) {
  check_in_domain(inst, x);
  return inst.expected_loss(x);
}

double empirical_loss(const Instance& inst, const Sample& s, const Vector& x) {
  check_in_domain(inst, x);
  if (s.outcomes.empty()) throw InputError("empirical loss of an empty sample");
  return inst.mean_loss(count_outcomes(s), x);
}

Sample draw_sample(const Instance& inst, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InputError("sample size must be at least 1");
  Rng rng(seed);
  Sample s;
  s.seed = seed;
  s.outcomes.reserve(n);
  for (std::size_t j = 0; j < n; ++j) s.outcomes.push_back(inst.draw(rng));
  return s;
}

Vector empirical_subgradient(const Instance& inst, const Sample& s, const Vector& x) {
  const OutcomeCounts counts = count_outcomes(s);
  Vector acc = Vector::Zero(inst.ball().dim());
  for (const auto& [z, k] : counts.entries) acc += static_cast<double>(k) * inst.subgradient(z, x);
  return acc / static_cast<double>(counts.total);
}

bool InvariantReport::pass(double tol) const {
  return weights_nonnegative && weight_sum_error <= 1e-12 && lipschitz_excess <= tol &&
         bound_excess <= tol && subgradient_excess <= tol && dual_norm_excess <= tol;
}

nlohmann::json InvariantReport::to_json() const {
  return {{"probes", probes},
          {"weight_sum_error", weight_sum_error},
          {"weights_nonnegative", weights_nonnegative},
          {"lipschitz_excess", lipschitz_excess},
          {"bound_excess", bound_excess},
          {"subgradient_excess", subgradient_excess},
          {"dual_norm_excess", dual_norm_excess},
          {"pass", pass()}};
}

InvariantReport check_invariants(const Instance& inst, std::size_t probes, std::uint64_t seed) {
  InvariantReport rep;
  rep.probes = probes;
  if (inst.explicit_weights()) {
    double total = 0.0;
    for (double w : inst.weights()) {
      total += w;
      rep.weights_nonnegative = rep.weights_nonnegative && w >= 0.0;
    }
    rep.weight_sum_error = std::abs(total - 1.0);
  }
  const NormBall& ball = inst.ball();
  const double L = inst.lipschitz();
  const double c = inst.bound();
  Rng rng(seed);

  auto probe_outcome = [&](Outcome z, const Vector& x, const Vector& y) {
    const double fx = inst.loss(z, x);
    const double fy = inst.loss(z, y);
    const Vector g = inst.subgradient(z, x);
    rep.lipschitz_excess = std::max(rep.lipschitz_excess, std::abs(fx - fy) - L * norm_eval(ball, x - y));
    rep.bound_excess = std::max({rep.bound_excess, std::abs(fx) - c, std::abs(fy) - c});
    rep.subgradient_excess = std::max(rep.subgradient_excess, fx + g.dot(y - x) - fy);
    rep.dual_norm_excess = std::max(rep.dual_norm_excess, dual_norm_eval(ball, g) - L);
  };

  // Vertices +-e_i are included since bounds and Lipschitz extremes sit on the boundary.
  std::vector<Vector> fixed;
  for (int i = 0; i < ball.dim(); ++i) {
    Vector e = Vector::Zero(ball.dim());
    e[i] = 1.0;
    fixed.push_back(e);
    fixed.push_back(-e);
  }
  fixed.push_back(Vector::Zero(ball.dim()));

  for (std::size_t t = 0; t < probes; ++t) {
    const Vector x = t < fixed.size() ? fixed[t] : sample_uniform(ball, rng);
    const Vector y = sample_uniform(ball, rng);
    if (inst.explicit_weights()) {
      for (std::size_t z = 0; z < inst.outcome_count(); ++z) probe_outcome(z, x, y);
    } else {
      probe_outcome(inst.draw(rng), x, y);
    }
  }
  return rep;
}

}  // namespace scolab
