#pragma once

// Helpers shared by the unit tests.

#include "rbcast/channel.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testing {

/// Dense shift-structured matrix with the given P[1 | s] per history.
inline std::vector<std::vector<double>> shift_matrix(int order, const std::vector<double>& success)
{
  const std::uint32_t states = 1u << order;
  const std::uint32_t mask = states - 1;
  std::vector<std::vector<double>> rows(states, std::vector<double>(states, 0.0));
  for (std::uint32_t s = 0; s < states; ++s) {
    rows[s][(s << 1) & mask] += 1.0 - success[s];
    rows[s][((s << 1) | 1u) & mask] += success[s];
  }
  return rows;
}

/// Random validated chain of the given order; success probabilities drawn from
/// [0.05, 0.95] so every chain is irreducible and aperiodic.
inline rbcast::ChannelModel random_chain(int order, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> u{0.05, 0.95};
  std::vector<double> success(std::size_t{1} << order);
  for (auto& p : success)
    p = u(rng);
  return rbcast::from_transition(order, shift_matrix(order, success));
}

/// Largest eigenvalue of [[a, b], [c, d]] from the characteristic polynomial.
inline double quadratic_root(double a, double b, double c, double d)
{
  const double tr = a + d;
  const double det = a * d - b * c;
  return 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
}

inline double kl_bernoulli(double beta, double gamma)
{
  return beta * std::log(beta / gamma) + (1.0 - beta) * std::log((1.0 - beta) / (1.0 - gamma));
}

} // namespace testing
