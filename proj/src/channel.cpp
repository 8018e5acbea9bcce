#include "rbcast/channel.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

namespace rbcast {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kStationaryTol = 1e-12;
constexpr int kStationaryMaxIter = 1'000'000;

using Adjacency = std::vector<std::vector<std::uint32_t>>;

std::vector<int> bfs_levels(const Adjacency& adj, std::uint32_t root)
{
  std::vector<int> level(adj.size(), -1);
  std::queue<std::uint32_t> pending;
  level[root] = 0;
  pending.push(root);
  while (!pending.empty()) {
    auto s = pending.front();
    pending.pop();
    for (auto u : adj[s]) {
      if (level[u] < 0) {
        level[u] = level[s] + 1;
        pending.push(u);
      }
    }
  }
  return level;
}

// Strongly connected and aperiodic. The period of an irreducible chain is the
// gcd of level[s] + 1 - level[u] over all edges s -> u of a BFS from any root.
void check_ergodic(const Adjacency& adj)
{
  const auto n = adj.size();
  Adjacency reverse(n);
  for (std::uint32_t s = 0; s < n; ++s)
    for (auto u : adj[s])
      reverse[u].push_back(s);

  auto fwd = bfs_levels(adj, 0);
  auto bwd = bfs_levels(reverse, 0);
  for (std::size_t s = 0; s < n; ++s)
    if (fwd[s] < 0 || bwd[s] < 0)
      throw std::invalid_argument("channel chain is reducible");

  int period = 0;
  for (std::uint32_t s = 0; s < n; ++s)
    for (auto u : adj[s])
      period = std::gcd(period, std::abs(fwd[s] + 1 - fwd[u]));
  if (period != 1)
    throw std::invalid_argument("channel chain is periodic (period " + std::to_string(period) + ")");
}

} // namespace

ChannelState ChannelState::from_history(std::span<const int> history)
{
  if (history.size() > static_cast<std::size_t>(kMaxOrder))
    throw std::invalid_argument("history longer than the maximum channel order");
  ChannelState st;
  for (int bit : history) {
    if (bit != 0 && bit != 1)
      throw std::invalid_argument("history entries must be 0 or 1");
    st.bits = (st.bits << 1) | static_cast<std::uint32_t>(bit);
  }
  return st;
}

std::vector<int> ChannelState::history(int order) const
{
  std::vector<int> out(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i)
    out[static_cast<std::size_t>(order - 1 - i)] = static_cast<int>((bits >> i) & 1u);
  return out;
}

double ChannelModel::transition(std::uint32_t from, std::uint32_t to) const noexcept
{
  double p = m_success[from];
  double out = 0.0;
  if (shift(from, 1) == to)
    out += p;
  if (shift(from, 0) == to)
    out += 1.0 - p;
  return out;
}

std::vector<std::vector<double>> ChannelModel::dense_matrix() const
{
  const auto n = num_states();
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (std::uint32_t s = 0; s < n; ++s)
    for (std::uint32_t u = 0; u < n; ++u)
      rows[s][u] = transition(s, u);
  return rows;
}

bool ChannelModel::is_memoryless() const noexcept
{
  for (double p : m_success)
    if (std::abs(p - m_success.front()) > 1e-15)
      return false;
  return true;
}

ChannelModel memoryless(double gamma)
{
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("memoryless channel needs 0 < gamma < 1");
  ChannelModel m;
  m.m_order = 0;
  m.m_mask = 0;
  m.m_gamma = gamma;
  m.m_success = {gamma};
  m.m_stationary = {1.0};
  return m;
}

ChannelModel from_transition(int order, const std::vector<std::vector<double>>& rows)
{
  if (order < 1 || order > kMaxOrder)
    throw std::invalid_argument("channel order must be in [1, " + std::to_string(kMaxOrder) + "]");
  const std::uint32_t n = std::uint32_t{1} << order;
  if (rows.size() != n)
    throw std::invalid_argument("transition matrix must have 2^l rows");

  ChannelModel m;
  m.m_order = order;
  m.m_mask = n - 1;
  m.m_success.resize(n);

  Adjacency adj(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    const auto& row = rows[s];
    if (row.size() != n)
      throw std::invalid_argument("transition matrix must be square");
    double sum = 0.0;
    for (std::uint32_t u = 0; u < n; ++u) {
      double v = row[u];
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("transition entries must lie in [0, 1]");
      sum += v;
      bool legal = (u == m.shift(s, 0)) || (u == m.shift(s, 1));
      if (!legal && v != 0.0)
        throw std::invalid_argument("transition violates the one-slot shift structure");
      if (v > 0.0)
        adj[s].push_back(u);
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw std::invalid_argument("transition rows must sum to 1");
    m.m_success[s] = row[m.shift(s, 1)];
  }
  check_ergodic(adj);

  // Power iteration on Pi^T, using the two nonzeros per row.
  std::vector<double> cur(n, 1.0 / n), next(n);
  int iter = 0;
  for (;;) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::uint32_t s = 0; s < n; ++s) {
      double p = m.m_success[s];
      next[m.shift(s, 1)] += cur[s] * p;
      next[m.shift(s, 0)] += cur[s] * (1.0 - p);
    }
    double total = std::accumulate(next.begin(), next.end(), 0.0);
    double diff = 0.0;
    for (std::uint32_t s = 0; s < n; ++s) {
      next[s] /= total;
      diff += std::abs(next[s] - cur[s]);
    }
    cur.swap(next);
    ++iter;
    if (diff < kStationaryTol)
      break;
    if (iter >= kStationaryMaxIter)
      throw std::runtime_error("stationary distribution did not converge");
  }
  m.m_stationary = std::move(cur);
  m.m_stationary_iterations = iter;

  double gamma = 0.0;
  for (std::uint32_t s = 0; s < n; ++s)
    gamma += m.m_stationary[s] * ChannelModel::newest_bit(s);
  m.m_gamma = gamma;
  return m;
}

GilbertElliott::GilbertElliott(double p01_, double p10_)
  : p01{p01_}
  , p10{p10_}
{
  if (!(p01 > 0.0 && p01 <= 1.0) || !(p10 > 0.0 && p10 <= 1.0))
    throw std::invalid_argument("Gilbert-Elliott probabilities must lie in (0, 1]");
}

ChannelModel GilbertElliott::model() const
{
  return from_transition(1, {{1.0 - p01, p01}, {p10, 1.0 - p10}});
}

ChannelModel gilbert_elliott(double p01, double p10)
{
  return GilbertElliott{p01, p10}.model();
}

std::vector<double> stationary_distribution(const ChannelModel& model)
{
  if (model.order() < 1)
    throw std::invalid_argument("stationary distribution requires order >= 1");
  auto pi = model.stationary();
  return {pi.begin(), pi.end()};
}

std::pair<int, ChannelState> next_slot(const ChannelModel& model, ChannelState state, double uniform_draw)
{
  int bit = uniform_draw < model.success_given(state.bits) ? 1 : 0;
  return {bit, ChannelState{model.shift(state.bits, bit)}};
}

std::optional<GilbertElliott> as_gilbert_elliott(const ChannelModel& model)
{
  if (model.order() == 0)
    return GilbertElliott{model.success_prob(), 1.0 - model.success_prob()};
  if (model.order() == 1)
    return GilbertElliott{model.success_given(0), 1.0 - model.success_given(1)};
  return std::nullopt;
}

} // namespace rbcast
