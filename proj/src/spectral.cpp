#include "rbcast/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rbcast {

namespace {

constexpr double kBoundaryBeta = 1e-6;
constexpr double kDerivStep = 1e-6;
constexpr double kGoldenWidth = 1e-12;
constexpr int kGoldenMaxIter = 500;

double log_perron(const ChannelModel& model, double theta)
{
  return std::log(perron_root(TiltedMatrix{model, theta}));
}

// Value of the boundary extension: -log of the probability of repeating the
// extreme outcome forever, i.e. of staying in the all-zero (all-one) history.
double boundary_rate(const ChannelModel& model, bool at_zero)
{
  double stay = at_zero ? 1.0 - model.success_given(0) : model.success_given(model.all_ones_state());
  if (stay <= 0.0)
    return std::numeric_limits<double>::infinity();
  return -std::log(stay);
}

} // namespace

TiltedMatrix::TiltedMatrix(const ChannelModel& model, double theta)
  : m_order{model.order()}
  , m_mask{model.num_states() - 1}
  , m_theta{theta}
{
  if (!(std::abs(theta) <= kMaxTilt))
    throw std::domain_error("tilt parameter outside [-700, 700]");
  const double lift = std::exp(theta);
  const auto n = model.num_states();
  m_to_zero.resize(n);
  m_to_one.resize(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    double p = model.success_given(s);
    m_to_zero[s] = 1.0 - p;
    m_to_one[s] = p * lift;
  }
}

double TiltedMatrix::entry(std::uint32_t from, std::uint32_t to) const noexcept
{
  double out = 0.0;
  if ((((from << 1) | 1u) & m_mask) == to)
    out += m_to_one[from];
  if (((from << 1) & m_mask) == to)
    out += m_to_zero[from];
  return out;
}

std::vector<std::vector<double>> TiltedMatrix::dense() const
{
  const auto n = dim();
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (std::uint32_t s = 0; s < n; ++s)
    for (std::uint32_t u = 0; u < n; ++u)
      rows[s][u] = entry(s, u);
  return rows;
}

void TiltedMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const
{
  const auto n = dim();
  y.resize(n);
  for (std::uint32_t s = 0; s < n; ++s)
    y[s] = m_to_zero[s] * x[(s << 1) & m_mask] + m_to_one[s] * x[((s << 1) | 1u) & m_mask];
}

TiltedMatrix tilted(const ChannelModel& model, double theta)
{
  return TiltedMatrix{model, theta};
}

double perron_root(const TiltedMatrix& m)
{
  switch (m.dim()) {
  case 1:
    return m.entry(0, 0);
  case 2: {
    double a = m.entry(0, 0), b = m.entry(0, 1);
    double c = m.entry(1, 0), d = m.entry(1, 1);
    double half_gap = 0.5 * (a - d);
    return 0.5 * (a + d) + std::sqrt(half_gap * half_gap + b * c);
  }
  default:
    return perron_root_iterative(m).root;
  }
}

PowerIterationResult perron_root_iterative(const TiltedMatrix& m, double rel_tol, int max_iterations)
{
  const auto n = m.dim();
  std::vector<double> x(n, 1.0), y;
  PowerIterationResult out;
  for (int it = 1; it <= max_iterations; ++it) {
    m.multiply(x, y);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double top = *std::max_element(y.begin(), y.end());
    for (std::uint32_t s = 0; s < n; ++s) {
      if (x[s] <= 1e-280)
        continue;
      double r = y[s] / x[s];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    out.lower = lo;
    out.upper = hi;
    out.iterations = it;
    if (hi - lo <= rel_tol * hi) {
      out.root = 0.5 * (lo + hi);
      return out;
    }
    for (std::uint32_t s = 0; s < n; ++s)
      x[s] = y[s] / top;
  }
  throw std::runtime_error("Perron root power iteration did not converge");
}

double rate_objective(const ChannelModel& model, double beta, double theta)
{
  return theta * beta - log_perron(model, theta);
}

RateFunctionEval rate_function(const ChannelModel& model, double beta)
{
  if (!(beta > 0.0 && beta < 1.0))
    throw std::domain_error("rate function needs 0 < beta < 1");

  RateFunctionEval out;
  out.beta = beta;
  if (beta <= kBoundaryBeta || beta >= 1.0 - kBoundaryBeta) {
    bool at_zero = beta <= kBoundaryBeta;
    out.boundary = true;
    out.value = boundary_rate(model, at_zero);
    out.capped = std::isinf(out.value);
    out.theta_star = at_zero ? -std::numeric_limits<double>::infinity()
                              : std::numeric_limits<double>::infinity();
    return out;
  }

  auto objective = [&](double theta) { return rate_objective(model, beta, theta); };
  auto slope = [&](double theta) {
    double a = std::clamp(theta - kDerivStep, -kMaxTilt, kMaxTilt);
    double b = std::clamp(theta + kDerivStep, -kMaxTilt, kMaxTilt);
    return (objective(b) - objective(a)) / (b - a);
  };

  // Bracket the maximizer by doubling outward from [-1, 1].
  double lo = -1.0, hi = 1.0;
  while (slope(hi) > 0.0) {
    if (hi >= kMaxTilt) {
      out.capped = true;
      out.theta_star = kMaxTilt;
      out.value = objective(kMaxTilt);
      return out;
    }
    lo = hi;
    hi = std::min(2.0 * hi, kMaxTilt);
  }
  while (slope(lo) < 0.0) {
    if (lo <= -kMaxTilt) {
      out.capped = true;
      out.theta_star = -kMaxTilt;
      out.value = objective(-kMaxTilt);
      return out;
    }
    hi = lo;
    lo = std::max(2.0 * lo, -kMaxTilt);
  }

  // Golden-section maximization of the concave objective.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = objective(c), fd = objective(d);
  int iter = 0;
  while (hi - lo > kGoldenWidth && iter < kGoldenMaxIter) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = objective(d);
    }
    ++iter;
  }
  out.theta_star = 0.5 * (lo + hi);
  out.value = std::max({objective(out.theta_star), fc, fd, 0.0});
  out.iterations = iter;
  return out;
}

double rate_function_memoryless(double gamma, double beta)
{
  auto xlogx_ratio = [](double x, double y) { return x > 0.0 ? x * std::log(x / y) : 0.0; };
  return xlogx_ratio(beta, gamma) + xlogx_ratio(1.0 - beta, 1.0 - gamma);
}

} // namespace rbcast
