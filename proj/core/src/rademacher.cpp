#include "scolab/rademacher.hpp"

#include <bit>
#include <cmath>
#include <sstream>
#include <vector>

#include "scolab/errors.hpp"
#include "scolab/parallel.hpp"
#include "scolab/random.hpp"

namespace scolab {
namespace {

void check_data(const NormBall& ball, std::span<const Vector> S) {
  if (S.empty()) throw InputError("Rademacher complexity needs at least one vector");
  for (const Vector& g : S) {
    if (g.size() != ball.dim()) throw InputError("data vector has the wrong dimension");
    if (dual_norm_eval(ball, g) > 1.0 + 1e-9)
      throw InputError("data vectors must lie in the dual unit ball");
  }
}

constexpr std::size_t kMcBlock = 1024;

}  // namespace

nlohmann::json RadEstimate::to_json() const {
  return {{"value", value}, {"stderr", stderr}, {"n", n}, {"method", method}};
}

nlohmann::json MonotonicityReport::to_json() const {
  return {{"n", n}, {"full", full}, {"leave_one_out", leave_one_out}, {"pass", pass}};
}

RadEstimate rad_exact(const NormBall& ball, std::span<const Vector> S, unsigned jobs) {
  check_data(ball, S);
  const std::size_t n = S.size();
  if (n > kMaxExactRademacher) {
    std::ostringstream msg;
    msg << "exact Rademacher enumeration is limited to n <= " << kMaxExactRademacher << " (got " << n
        << "); use rad_mc";
    throw CapacityError(msg.str());
  }
  // sigma and -sigma give the same norm, so fix sigma_0 = +1 and enumerate the
  // remaining n - 1 signs: the top `split` bits pick a block, the rest are
  // walked in Gray-code order within it.
  const std::size_t free_bits = n - 1;
  const std::size_t split = std::min<std::size_t>(free_bits, 6);
  const std::size_t blocks = std::size_t{1} << split;
  const std::size_t inner_bits = free_bits - split;
  std::vector<double> partial(blocks, 0.0);

  parallel_for(blocks, jobs, [&](std::size_t b) {
    Vector sum = S[0];
    std::vector<double> sign(n, 1.0);
    for (std::size_t k = 0; k < split; ++k) {
      const std::size_t j = 1 + inner_bits + k;
      sign[j] = (b >> k & 1) ? -1.0 : 1.0;
    }
    for (std::size_t j = 1; j < n; ++j) sum += sign[j] * S[j];
    double acc = dual_norm_eval(ball, sum);
    const std::size_t steps = std::size_t{1} << inner_bits;
    for (std::size_t step = 1; step < steps; ++step) {
      const std::size_t j = 1 + static_cast<std::size_t>(std::countr_zero(step));
      sum -= 2.0 * sign[j] * S[j];
      sign[j] = -sign[j];
      acc += dual_norm_eval(ball, sum);
    }
    partial[b] = acc;
  });

  double total = 0.0;
  for (double p : partial) total += p;
  const double patterns = std::ldexp(1.0, static_cast<int>(free_bits));
  return {total / patterns / static_cast<double>(n), 0.0, n, "exact"};
}

RadEstimate rad_mc(const NormBall& ball, std::span<const Vector> S, std::size_t trials,
                   std::uint64_t seed, unsigned jobs) {
  check_data(ball, S);
  if (trials < 1000) throw InputError("Monte-Carlo Rademacher estimates need at least 1000 trials");
  const std::size_t n = S.size();
  const std::size_t blocks = (trials + kMcBlock - 1) / kMcBlock;
  std::vector<double> sums(blocks, 0.0), squares(blocks, 0.0);

  parallel_for(blocks, jobs, [&](std::size_t b) {
    Rng rng(derive_seed(seed, {b}));
    const std::size_t begin = b * kMcBlock, end = std::min(trials, begin + kMcBlock);
    Vector sum(ball.dim());
    for (std::size_t t = begin; t < end; ++t) {
      sum.setZero();
      std::uint64_t bits = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j % 64 == 0) bits = rng();  // one draw supplies 64 signs
        if (bits >> (j % 64) & 1) sum += S[j];
        else sum -= S[j];
      }
      const double v = dual_norm_eval(ball, sum) / static_cast<double>(n);
      sums[b] += v;
      squares[b] += v * v;
    }
  });

  double s = 0.0, s2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) s += sums[b], s2 += squares[b];
  const double T = static_cast<double>(trials);
  const double mean = s / T;
  const double var = std::max(0.0, (s2 - T * mean * mean) / (T - 1.0));
  return {mean, std::sqrt(var / T), n, "monte-carlo"};
}

double rad_upper_bound(const NormBall& ball, std::size_t n) {
  if (n == 0) throw InputError("rad_upper_bound needs n >= 1");
  const double nn = static_cast<double>(n);
  const double d = static_cast<double>(ball.dim());
  switch (ball.family()) {
    case NormFamily::L2:
      return 1.0 / std::sqrt(nn);
    case NormFamily::L1:
      return std::sqrt(2.0 * std::log(2.0 * d) / nn);
    case NormFamily::Linf:
      return std::sqrt(d / nn);
    case NormFamily::Lp:
      break;
  }
  throw UnsupportedError("no Rademacher upper bound implemented for " + ball.name());
}

std::size_t rad_inverse(const NormBall& ball, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw InputError("rad_inverse needs eps in (0, 1]");
  std::size_t hi = 1;
  while (!(rad_upper_bound(ball, hi) < eps)) {
    if (hi >= (std::size_t{1} << 62)) throw CapacityError("rad_inverse search exceeded 2^62");
    hi *= 2;
  }
  std::size_t lo = hi / 2;  // bound(lo) >= eps, or lo == 0
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (rad_upper_bound(ball, mid) < eps) hi = mid;
    else lo = mid;
  }
  return hi;
}

MonotonicityReport check_monotonicity(const NormBall& ball, std::span<const Vector> S) {
  if (S.size() < 2) throw InputError("monotonicity check needs at least two vectors");
  if (S.size() > 13) throw CapacityError("monotonicity check enumerates exactly and needs n + 1 <= 13");
  MonotonicityReport r;
  r.n = S.size() - 1;
  r.full = rad_exact(ball, S).value;
  std::vector<Vector> rest;
  for (std::size_t j = 0; j < S.size(); ++j) {
    rest.clear();
    for (std::size_t i = 0; i < S.size(); ++i)
      if (i != j) rest.push_back(S[i]);
    r.leave_one_out += rad_exact(ball, rest).value;
  }
  r.leave_one_out /= static_cast<double>(S.size());
  r.pass = r.full <= r.leave_one_out + 1e-12;
  return r;
}

}  // namespace scolab
