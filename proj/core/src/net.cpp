#include "scolab/net.hpp"

#include <cmath>
#include <sstream>

#include "scolab/errors.hpp"

namespace scolab {
namespace {

// Appends grid points k * step (|k| <= K per axis) lying in K, up to `budget`.
void append_grid(const NormBall& ball, double step, std::size_t budget,
                 std::vector<Vector>& out) {
  const int d = ball.dim();
  const long half = static_cast<long>(std::floor(1.0 / step + 1e-12));
  std::vector<long> idx(d, -half);
  Vector x(d);
  for (;;) {
    for (int i = 0; i < d; ++i) x[i] = static_cast<double>(idx[i]) * step;
    if (contains(ball, x, 1e-12)) {
      if (out.size() >= budget) return;
      out.push_back(x);
    }
    int axis = d - 1;
    while (axis >= 0 && idx[axis] == half) idx[axis--] = -half;
    if (axis < 0) return;
    ++idx[axis];
  }
}

}  // namespace

double packing_size_bound(int dim, double eps) {
  return std::pow(2.0 * (1.0 + eps) / eps, dim);
}

Net build_net(const NormBall& ball, double eps, std::size_t candidate_budget,
              std::uint64_t seed, double size_cap) {
  if (!(eps > 0.0)) throw InputError("net separation must be positive");
  const double bound = packing_size_bound(ball.dim(), eps);
  if (bound > size_cap) {
    std::ostringstream msg;
    msg << "an eps-packing of the " << ball.name() << " ball in dimension " << ball.dim()
        << " at eps=" << eps << " may need up to " << bound << " points (cap " << size_cap
        << "); increase eps or lower the dimension";
    throw CapacityError(msg.str());
  }

  std::vector<Vector> candidates;
  const double step = eps / (2.0 * std::sqrt(static_cast<double>(ball.dim())));
  append_grid(ball, step, candidate_budget, candidates);
  Rng rng(seed);
  while (candidates.size() < candidate_budget) candidates.push_back(sample_uniform(ball, rng));

  Net net{ball, eps, 2.0 * eps, std::numeric_limits<double>::quiet_NaN(), seed, {}};
  for (const Vector& c : candidates) {
    bool separated = true;
    for (const Vector& y : net.points) {
      if (!(norm_eval(ball, c - y) > eps)) {
        separated = false;
        break;
      }
    }
    if (separated) net.points.push_back(c);
  }
  return net;
}

double measure_cover_radius(const Net& net, std::size_t probes, std::uint64_t seed) {
  if (net.points.empty()) throw InputError("empty net");
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < probes; ++i) {
    const Vector x = sample_uniform(net.ball, rng);
    double nearest = std::numeric_limits<double>::infinity();
    for (const Vector& y : net.points) nearest = std::min(nearest, norm_eval(net.ball, x - y));
    worst = std::max(worst, nearest);
  }
  return worst;
}

nlohmann::json to_json(const Net& net) {
  nlohmann::json points = nlohmann::json::array();
  for (const Vector& p : net.points) points.push_back(std::vector<double>(p.begin(), p.end()));
  nlohmann::json j{{"family", net.ball.name()},
                   {"dim", net.ball.dim()},
                   {"eps", net.separation},
                   {"seed", net.seed},
                   {"cover_radius", net.cover_radius},
                   {"points", std::move(points)}};
  if (net.ball.family() == NormFamily::Lp) j["p"] = net.ball.exponent();
  if (!std::isnan(net.measured_radius)) j["measured_radius"] = net.measured_radius;
  return j;
}

Net net_from_json(const nlohmann::json& j) {
  try {
    std::string family = j.at("family").get<std::string>();
    double p = 2.0;
    if (family.rfind("lp", 0) == 0 && family.size() > 2) {
      p = j.contains("p") ? j.at("p").get<double>() : std::stod(family.substr(2));
      family = "lp";
    }
    const NormBall ball = NormBall::parse(family, j.at("dim").get<int>(), p);
    const double eps = j.at("eps").get<double>();
    Net net{ball, eps, j.value("cover_radius", 2.0 * eps),
            j.value("measured_radius", std::numeric_limits<double>::quiet_NaN()),
            j.at("seed").get<std::uint64_t>(), {}};
    for (const auto& row : j.at("points")) {
      const auto v = row.get<std::vector<double>>();
      if (static_cast<int>(v.size()) != ball.dim()) throw InputError("net point has wrong dimension");
      net.points.push_back(Eigen::Map<const Vector>(v.data(), ball.dim()));
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed net JSON: ") + e.what());
  }
}

}  // namespace scolab
