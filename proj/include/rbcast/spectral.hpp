#pragma once

// Tilted transition matrices, Perron roots and the large-deviations rate
// function of the per-slot success fraction.

#include "rbcast/channel.hpp"

#include <cstdint>
#include <vector>

namespace rbcast {

inline constexpr double kMaxTilt = 700.0;

/// Pi_theta: entry (s, u) = pi(s, u) * exp(theta * newest_bit(u)).
///
/// A memoryless channel is a one-state chain whose single transition carries
/// the moment generating function (1 - gamma) + gamma * exp(theta), so that at
/// theta = 0 it reduces to the stochastic 1x1 matrix [1].
class TiltedMatrix
{
public:
  TiltedMatrix(const ChannelModel& model, double theta);

  double theta() const noexcept { return m_theta; }
  std::uint32_t dim() const noexcept { return static_cast<std::uint32_t>(m_to_zero.size()); }

  double entry(std::uint32_t from, std::uint32_t to) const noexcept;
  std::vector<std::vector<double>> dense() const;

  /// y = Pi_theta * x
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;

private:
  int m_order;
  std::uint32_t m_mask;
  double m_theta;
  std::vector<double> m_to_zero; // weight of the shift appending 0
  std::vector<double> m_to_one;  // weight of the shift appending 1, already tilted
};

TiltedMatrix tilted(const ChannelModel& model, double theta);

/// Largest eigenvalue: the scalar for 1x1, the closed-form quadratic root for
/// 2x2, Collatz-Wielandt bracketed power iteration otherwise.
double perron_root(const TiltedMatrix& m);

struct PowerIterationResult
{
  double root = 0.0;
  double lower = 0.0; // Collatz-Wielandt bounds at exit
  double upper = 0.0;
  int iterations = 0;
};

/// Power iteration regardless of dimension; throws std::runtime_error when the
/// bounds fail to meet within the iteration cap.
PowerIterationResult perron_root_iterative(const TiltedMatrix& m, double rel_tol = 1e-13,
                                           int max_iterations = 1'000'000);

struct RateFunctionEval
{
  double beta = 0.0;
  double theta_star = 0.0;
  double value = 0.0;
  int iterations = 0;
  /// beta within 1e-6 of 0 or 1: value is the continuous extension.
  bool boundary = false;
  /// The maximizing tilt ran past |theta| = kMaxTilt; value is the objective there
  /// (or +inf at a boundary with an unreachable outcome).
  bool capped = false;
};

/// sup_theta { theta * beta - log rho(Pi_theta) }.
RateFunctionEval rate_function(const ChannelModel& model, double beta);

/// theta * beta - log rho(Pi_theta); concave in theta.
double rate_objective(const ChannelModel& model, double beta, double theta);

/// Bernoulli KL divergence D(beta || gamma).
double rate_function_memoryless(double gamma, double beta);

} // namespace rbcast
