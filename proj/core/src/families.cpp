#include "scolab/families.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "scolab/errors.hpp"

namespace scolab {
namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

Vector scalar(double v) { return Vector::Constant(1, v); }

nlohmann::json to_rows(const std::vector<Vector>& vs) {
  nlohmann::json rows = nlohmann::json::array();
  for (const Vector& v : vs) rows.push_back(std::vector<double>(v.begin(), v.end()));
  return rows;
}

std::vector<Vector> from_rows(const nlohmann::json& rows) {
  std::vector<Vector> out;
  for (const auto& row : rows) {
    const auto v = row.get<std::vector<double>>();
    out.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return out;
}

// --------------------------------------------------------------------------
// Coin

class CoinInstance final : public Instance {
 public:
  explicit CoinInstance(double eps0)
      : Instance(NormBall::l2(1), 1.0 + 2.0 * eps0, 1.0 + 2.0 * eps0, label_for(eps0), {0.5, 0.5}),
        eps0_(eps0) {}

  double loss(Outcome z, const Vector& x) const override {
    return 2.0 * eps0_ * std::abs(x[0]) + coin(z) * x[0];
  }

  Vector subgradient(Outcome z, const Vector& x) const override {
    return scalar(2.0 * eps0_ * sign(x[0]) + coin(z));
  }

  std::vector<Vector> subdifferential_extremes(Outcome z, const Vector& x) const override {
    if (x[0] != 0.0) return {subgradient(z, x)};
    return {scalar(coin(z) - 2.0 * eps0_), scalar(coin(z) + 2.0 * eps0_)};
  }

  std::optional<Vector> known_minimizer() const override { return Vector::Zero(1); }

  std::vector<Vector> spurious_candidates(const Sample& s) const override {
    const double m = mean_coin(s);
    if (std::abs(m) > 2.0 * eps0_) return {scalar(-sign(m))};
    return {};
  }

  // argmin over [-1, 1] of 2 eps0 |x| + m x.
  std::optional<Vector> empirical_minimizer(const Sample& s) const override {
    const double m = mean_coin(s);
    return scalar(std::abs(m) > 2.0 * eps0_ ? -sign(m) : 0.0);
  }

  nlohmann::json descriptor() const override { return {{"family", "coin"}, {"eps0", eps0_}}; }

 private:
  static double coin(Outcome z) { return z == 0 ? 1.0 : -1.0; }

  static double mean_coin(const Sample& s) {
    double acc = 0.0;
    for (Outcome z : s.outcomes) acc += coin(z);
    return acc / static_cast<double>(s.size());
  }

  static std::string label_for(double eps0) {
    std::ostringstream s;
    s << "coin(eps0=" << eps0 << ")";
    return s.str();
  }

  double eps0_;
};

// --------------------------------------------------------------------------
// Hidden directions

class HardInstance final : public Instance {
 public:
  HardInstance(std::vector<Vector> directions, double eps0, nlohmann::json desc)
      : Instance(NormBall::l2(static_cast<int>(directions.front().size())), 1.0, 1.0,
                 label_for(directions, eps0)),
        directions_(std::move(directions)),
        eps0_(eps0),
        descriptor_(std::move(desc)) {}

  double loss(Outcome z, const Vector& x) const override {
    double best = 0.5;
    for (Outcome bits = z; bits != 0; bits &= bits - 1)
      best = std::max(best, directions_[std::countr_zero(bits)].dot(x));
    return best;
  }

  Vector subgradient(Outcome z, const Vector& x) const override {
    double best = 0.5;
    int arg = -1;
    for (Outcome bits = z; bits != 0; bits &= bits - 1) {
      const int k = std::countr_zero(bits);
      const double a = directions_[k].dot(x);
      if (a > best) best = a, arg = k;
    }
    return arg < 0 ? Vector(Vector::Zero(ball().dim())) : directions_[arg];
  }

  std::vector<Vector> subdifferential_extremes(Outcome z, const Vector& x) const override {
    const double best = loss(z, x);
    std::vector<Vector> active;
    if (0.5 >= best - 1e-12) active.push_back(Vector::Zero(ball().dim()));
    for (Outcome bits = z; bits != 0; bits &= bits - 1) {
      const int k = std::countr_zero(bits);
      if (directions_[k].dot(x) >= best - 1e-12) active.push_back(directions_[k]);
    }
    return active;
  }

  bool valid_outcome(Outcome z) const override {
    return directions_.size() >= 64 || z < (Outcome{1} << directions_.size());
  }

  Outcome draw(Rng& rng) const override {
    Outcome mask = 0;
    for (std::size_t k = 0; k < directions_.size(); ++k)
      if (uniform01(rng) < eps0_) mask |= Outcome{1} << k;
    return mask;
  }

  // Sorting <v, x> in decreasing order, the maximum is the first direction
  // present in z; the k-th one is first with probability eps0 (1 - eps0)^k.
  double expected_loss(const Vector& x) const override {
    double acc = 0.0, reach = 1.0;
    for (std::size_t k : order(x)) {
      acc += reach * eps0_ * std::max(0.5, directions_[k].dot(x));
      reach *= 1.0 - eps0_;
    }
    return acc + reach * 0.5;
  }

  Vector expected_subgradient(const Vector& x) const override {
    Vector acc = Vector::Zero(ball().dim());
    double reach = 1.0;
    for (std::size_t k : order(x)) {
      if (directions_[k].dot(x) > 0.5) acc += reach * eps0_ * directions_[k];
      reach *= 1.0 - eps0_;
    }
    return acc;
  }

  double mean_loss(const OutcomeCounts& counts, const Vector& x) const override {
    std::vector<double> dots(directions_.size());
    for (std::size_t k = 0; k < directions_.size(); ++k) dots[k] = directions_[k].dot(x);
    double acc = 0.0;
    for (const auto& [z, count] : counts.entries) {
      double best = 0.5;
      for (Outcome bits = z; bits != 0; bits &= bits - 1)
        best = std::max(best, dots[std::countr_zero(bits)]);
      acc += static_cast<double>(count) * best;
    }
    return acc / static_cast<double>(counts.total);
  }

  std::optional<Vector> common_subgradient(const Vector& x) const override {
    for (const Vector& v : directions_)
      if (v.dot(x) >= 0.5) return std::nullopt;
    return Vector::Zero(ball().dim());
  }

  std::optional<Vector> known_minimizer() const override { return Vector::Zero(ball().dim()); }

  // Directions never activated by the sample: F-hat equals 1/2 there, the
  // empirical minimum, while F exceeds the optimum by eps0 / 2.
  std::vector<Vector> spurious_candidates(const Sample& s) const override {
    Outcome seen = 0;
    for (Outcome z : s.outcomes) seen |= z;
    std::vector<Vector> out;
    for (std::size_t k = 0; k < directions_.size(); ++k)
      if (!(seen >> k & 1)) out.push_back(directions_[k]);
    return out;
  }

  std::optional<Vector> empirical_minimizer(const Sample&) const override {
    return Vector::Zero(ball().dim());
  }

  std::vector<Vector> structured_points() const override { return directions_; }

  nlohmann::json descriptor() const override { return descriptor_; }

 private:
  std::vector<std::size_t> order(const Vector& x) const {
    std::vector<double> dots(directions_.size());
    for (std::size_t k = 0; k < directions_.size(); ++k) dots[k] = directions_[k].dot(x);
    std::vector<std::size_t> idx(directions_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dots[a] > dots[b]; });
    return idx;
  }

  static std::string label_for(const std::vector<Vector>& v, double eps0) {
    std::ostringstream s;
    s << "hard(d=" << v.front().size() << ", m=" << v.size() << ", eps0=" << eps0 << ")";
    return s.str();
  }

  std::vector<Vector> directions_;
  double eps0_;
  nlohmann::json descriptor_;
};

void check_hard_eps0(double eps0) {
  if (!(eps0 > 0.0 && eps0 <= 0.5)) throw InputError("hard family needs eps0 in (0, 1/2]");
}

// --------------------------------------------------------------------------
// Quadratic

class QuadraticInstance final : public Instance {
 public:
  QuadraticInstance(std::vector<Vector> centers, const NormBall& ball, double L, double c)
      : Instance(ball, L, c, label_for(centers, ball),
                 std::vector<double>(centers.size(), 1.0 / static_cast<double>(centers.size()))),
        centers_(std::move(centers)) {}

  double loss(Outcome z, const Vector& x) const override {
    return (x - centers_[z]).squaredNorm() / 4.0;
  }

  Vector subgradient(Outcome z, const Vector& x) const override { return (x - centers_[z]) / 2.0; }

  std::vector<Vector> subdifferential_extremes(Outcome z, const Vector& x) const override {
    return {subgradient(z, x)};
  }

  std::optional<Vector> known_minimizer() const override {
    Vector centroid = Vector::Zero(ball().dim());
    for (const Vector& c : centers_) centroid += c;
    return projected(centroid / static_cast<double>(centers_.size()));
  }

  // F-hat(x) = ||x - mean||^2 / 4 + const, so the Euclidean projection of the
  // sample centroid is exact regardless of the ball's norm.
  std::optional<Vector> empirical_minimizer(const Sample& s) const override {
    Vector centroid = Vector::Zero(ball().dim());
    for (Outcome z : s.outcomes) centroid += centers_[z];
    return projected(centroid / static_cast<double>(s.size()));
  }

  nlohmann::json descriptor() const override {
    nlohmann::json j{{"family", "quadratic"}, {"ball", ball().family() == NormFamily::Lp ? "lp" : ball().name()},
                     {"dim", ball().dim()}, {"centers", to_rows(centers_)}};
    if (ball().family() == NormFamily::Lp) j["p"] = ball().exponent();
    return j;
  }

 private:
  std::optional<Vector> projected(const Vector& x) const {
    try {
      return project(ball(), x);
    } catch (const UnsupportedError&) {
      return std::nullopt;
    }
  }

  static std::string label_for(const std::vector<Vector>& c, const NormBall& ball) {
    std::ostringstream s;
    s << "quadratic(" << ball.name() << ", d=" << ball.dim() << ", centers=" << c.size() << ")";
    return s.str();
  }

  std::vector<Vector> centers_;
};

// --------------------------------------------------------------------------
// Finite

class FiniteInstance final : public Instance {
 public:
  explicit FiniteInstance(FiniteSpec spec)
      : Instance(spec.ball, spec.lipschitz, spec.bound, spec.label, spec.weights),
        outcomes_(std::move(spec.outcomes)),
        known_(std::move(spec.known_minimizer)),
        descriptor_(std::move(spec.descriptor)) {}

  double loss(Outcome z, const Vector& x) const override { return outcomes_.at(z).loss(x); }
  Vector subgradient(Outcome z, const Vector& x) const override {
    return outcomes_.at(z).subgradient(x);
  }
  std::vector<Vector> subdifferential_extremes(Outcome z, const Vector& x) const override {
    const auto& o = outcomes_.at(z);
    return o.extremes ? o.extremes(x) : std::vector<Vector>{};
  }
  std::optional<Vector> known_minimizer() const override { return known_; }
  nlohmann::json descriptor() const override { return descriptor_; }

 private:
  std::vector<FiniteOutcome> outcomes_;
  std::optional<Vector> known_;
  nlohmann::json descriptor_;
};

// --------------------------------------------------------------------------

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("instance descriptor must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in instance descriptor");
}

}  // namespace

InstancePtr make_coin_instance(double eps0) {
  if (!(eps0 > 0.0 && eps0 < 1.0)) throw InputError("coin instance needs eps0 in (0, 1)");
  return std::make_shared<CoinInstance>(eps0);
}

InstancePtr make_hard_instance(int d, double eps0, int m, std::uint64_t seed, int max_vectors) {
  if (d < 2) throw InputError("hard family needs d >= 2");
  if (m < 1) throw InputError("hard family needs m >= 1");
  if (m > std::min(max_vectors, kMaxHardVectors)) {
    std::ostringstream msg;
    msg << "hard family with m=" << m << " exceeds the cap of " << std::min(max_vectors, kMaxHardVectors)
        << " directions";
    throw CapacityError(msg.str());
  }
  check_hard_eps0(eps0);

  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const std::size_t budget = 1000 * static_cast<std::size_t>(m);
  std::vector<Vector> directions;
  for (std::size_t attempt = 0; directions.size() < static_cast<std::size_t>(m); ++attempt) {
    if (attempt >= budget) {
      std::ostringstream msg;
      msg << "rejection sampling found only " << directions.size() << " of " << m
          << " sign directions with pairwise inner product <= 1/2 in d=" << d << " after "
          << budget << " attempts";
      throw CapacityError(msg.str());
    }
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = (rng() >> 63) ? scale : -scale;
    const bool ok = std::all_of(directions.begin(), directions.end(),
                                [&](const Vector& u) { return u.dot(v) <= 0.5 + 1e-12; });
    if (ok) directions.push_back(std::move(v));
  }
  nlohmann::json desc{{"family", "hard"}, {"d", d}, {"eps0", eps0}, {"m", m}, {"seed", seed}};
  return std::make_shared<HardInstance>(std::move(directions), eps0, std::move(desc));
}

InstancePtr make_hard_instance(std::vector<Vector> directions, double eps0) {
  if (directions.empty()) throw InputError("hard family needs at least one direction");
  if (static_cast<int>(directions.size()) > kMaxHardVectors)
    throw CapacityError("hard family supports at most 64 directions");
  check_hard_eps0(eps0);
  const Eigen::Index d = directions.front().size();
  for (std::size_t i = 0; i < directions.size(); ++i) {
    if (directions[i].size() != d) throw InputError("hard family directions differ in dimension");
    if (std::abs(directions[i].norm() - 1.0) > 1e-9) throw InputError("hard family directions must be unit vectors");
    for (std::size_t j = 0; j < i; ++j)
      if (directions[i].dot(directions[j]) > 0.5 + 1e-12)
        throw InputError("hard family directions need pairwise inner products <= 1/2");
  }
  nlohmann::json desc{{"family", "hard"}, {"eps0", eps0}, {"directions", to_rows(directions)}};
  return std::make_shared<HardInstance>(std::move(directions), eps0, std::move(desc));
}

InstancePtr make_quadratic_instance(std::vector<Vector> centers, const NormBall& ball) {
  if (centers.empty()) throw InputError("quadratic family needs at least one center");
  double max_dual = 0.0, max_l2 = 0.0;
  for (const Vector& c : centers) {
    if (c.size() != ball.dim()) throw InputError("quadratic center has the wrong dimension");
    if (norm_eval(ball, c) > 3.0 + 1e-12) throw InputError("quadratic centers must lie within 2 of K");
    max_dual = std::max(max_dual, dual_norm_eval(ball, c));
    max_l2 = std::max(max_l2, c.norm());
  }
  // ||(x - z)/2||_* <= (||x||_* + ||z||_*)/2 and |f| <= (||x||_2 + ||z||_2)^2 / 4;
  // both are attained for the Euclidean ball.
  const double L = (dual_radius(ball) + max_dual) / 2.0;
  const double r = euclidean_radius(ball) + max_l2;
  return std::make_shared<QuadraticInstance>(std::move(centers), ball, L, r * r / 4.0);
}

InstancePtr make_finite_instance(FiniteSpec spec) {
  if (spec.outcomes.empty()) throw InputError("finite instance needs at least one outcome");
  if (spec.weights.size() != spec.outcomes.size())
    throw InputError("finite instance needs one weight per outcome");
  return std::make_shared<FiniteInstance>(std::move(spec));
}

std::vector<double> AppendixPair::f2_subgradient_extremes(double x) {
  if (std::abs(x + 0.1) <= 1e-12) return {-1.0, 1.0};
  return {x + 0.1 > 0.0 ? 1.0 : -1.0};
}

InstancePtr AppendixPair::as_instance() const {
  FiniteSpec spec;
  spec.ball = domain;
  spec.weights = {0.5, 0.5};
  spec.outcomes.push_back(FiniteOutcome{
      "2*f1",
      [](const Vector& x) { return 2.0 * f1(x[0]); },
      [](const Vector& x) { return scalar(2.0 * f1_derivative(x[0])); },
      [](const Vector& x) { return std::vector<Vector>{scalar(2.0 * f1_derivative(x[0]))}; }});
  spec.outcomes.push_back(FiniteOutcome{
      "2*f2",
      [](const Vector& x) { return 2.0 * f2(x[0]); },
      [](const Vector& x) { return scalar(x[0] + 0.1 >= 0.0 ? 2.0 : -2.0); },
      [](const Vector& x) {
        std::vector<Vector> out;
        for (double g : f2_subgradient_extremes(x[0])) out.push_back(scalar(2.0 * g));
        return out;
      }});
  // |2 f1'| <= 2 * 2.2 on [-1, 1]; |2 f1| <= 2 * 1.17 and |2 f2| <= 2 * 1.1.
  spec.lipschitz = 4.4;
  spec.bound = 2.34;
  spec.known_minimizer = scalar(-0.1);
  spec.label = "appendix(f1 + f2)";
  spec.descriptor = {{"family", "appendix"}};
  return make_finite_instance(std::move(spec));
}

AppendixPair make_appendix_pair() { return AppendixPair{}; }

InstancePtr make_instance(const nlohmann::json& j) {
  try {
    const std::string family = j.at("family").get<std::string>();
    if (family == "coin") {
      require_keys(j, {"family", "eps0"});
      return make_coin_instance(j.at("eps0").get<double>());
    }
    if (family == "hard") {
      if (j.contains("directions")) {
        require_keys(j, {"family", "eps0", "directions"});
        return make_hard_instance(from_rows(j.at("directions")), j.at("eps0").get<double>());
      }
      require_keys(j, {"family", "d", "eps0", "m", "seed"});
      return make_hard_instance(j.at("d").get<int>(), j.at("eps0").get<double>(), j.at("m").get<int>(),
                                j.value("seed", std::uint64_t{0}));
    }
    if (family == "quadratic") {
      require_keys(j, {"family", "ball", "dim", "centers", "p"});
      const NormBall ball = NormBall::parse(j.value("ball", std::string("l2")), j.at("dim").get<int>(),
                                            j.value("p", 2.0));
      return make_quadratic_instance(from_rows(j.at("centers")), ball);
    }
    if (family == "appendix") {
      require_keys(j, {"family"});
      return make_appendix_pair().as_instance();
    }
    throw ConfigError("unknown instance family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed instance descriptor: ") + e.what());
  }
}

}  // namespace scolab
