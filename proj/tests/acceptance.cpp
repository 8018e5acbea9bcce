// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
// criterion fails. Every runtime budget is part of its criterion.

#include "rbcast/asymptotic.hpp"
#include "rbcast/bounds.hpp"
#include "rbcast/experiment.hpp"
#include "rbcast/simulator.hpp"
#include "rbcast/spectral.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace rbcast;

namespace {

struct Outcome
{
  bool passed = true;
  std::string detail;
};

struct Criterion
{
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ChannelModel random_chain(int order, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> u{0.05, 0.95};
  const std::uint32_t states = 1u << order;
  const std::uint32_t mask = states - 1;
  std::vector<std::vector<double>> rows(states, std::vector<double>(states, 0.0));
  for (std::uint32_t s = 0; s < states; ++s) {
    double p = u(rng);
    rows[s][(s << 1) & mask] += 1.0 - p;
    rows[s][((s << 1) | 1u) & mask] += p;
  }
  return from_transition(order, rows);
}

double kl(double beta, double gamma)
{
  return beta * std::log(beta / gamma) + (1.0 - beta) * std::log((1.0 - beta) / (1.0 - gamma));
}

// ---------------------------------------------------------------------------

Outcome exact_oracle_agreement()
{
  Outcome out;
  int ok = 0, total = 0;
  double worst_z = 0.0;
  std::string worst;
  for (long long n : {1, 2, 5, 10})
    for (int k : {1, 2, 5, 10, 20})
      for (double g : {0.25, 0.5, 0.75}) {
        auto stats = estimate_expected_completion(memoryless(g), n, k, InitPolicy::stationary(), 100'000, 2024);
        const double exact = exact_expected_completion_memoryless(g, n, k);
        const double z = std::abs(stats.mean - exact) / stats.std_error;
        ++total;
        if (z <= 3.0)
          ++ok;
        if (z > worst_z) {
          worst_z = z;
          worst = fmt("n=%lld k=%d gamma=%.2f", n, k, g);
        }
      }
  const double eight_thirds = std::abs(exact_expected_completion_memoryless(0.5, 2, 1) - 8.0 / 3.0);
  out.passed = ok == total && eight_thirds <= 1e-9;
  out.detail = fmt("%d/%d settings within 3 SE (largest |z| %.2f at %s); |E[T(2,1)] - 8/3| = %.1e", ok, total,
                   worst_z, worst.c_str(), eight_thirds);
  return out;
}

Outcome spectral_correctness()
{
  Outcome out;
  std::mt19937_64 rng{7};
  double worst_root = 0.0;
  for (int i = 0; i < 200; ++i) {
    auto m = random_chain(1 + i % 3, rng);
    worst_root = std::max(worst_root, std::abs(perron_root(tilted(m, 0.0)) - 1.0));
  }
  std::uniform_real_distribution<double> p{0.01, 1.0}, th{-5.0, 5.0};
  double worst_2x2 = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto t = tilted(gilbert_elliott(p(rng), p(rng)), th(rng));
    const double closed = perron_root(t);
    worst_2x2 = std::max(worst_2x2, std::abs(closed - perron_root_iterative(t).root) / closed);
  }
  double worst_lambda = 0.0;
  for (double g : {0.25, 0.5, 0.75})
    for (int i = 1; i <= 19; ++i) {
      const double beta = 0.05 * i;
      worst_lambda = std::max(worst_lambda, std::abs(rate_function(memoryless(g), beta).value - kl(beta, g)));
    }
  out.passed = worst_root <= 1e-10 && worst_2x2 <= 1e-10 && worst_lambda <= 1e-8;
  out.detail = fmt("max |rho(Pi_0) - 1| = %.1e over 200 chains; 2x2 closed vs iterated %.1e; "
                   "memoryless Lambda numeric vs closed %.1e",
                   worst_root, worst_2x2, worst_lambda);
  return out;
}

Outcome asymptotic_solver()
{
  Outcome out;
  std::vector<ChannelModel> models = {memoryless(0.5), memoryless(0.25), gilbert_elliott(0.4, 0.4),
                                      gilbert_elliott(0.1, 0.3), gilbert_elliott(0.7, 0.2)};
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i)
    grid.push_back(0.1 * std::pow(1000.0, i / 19.0)); // 0.1 .. 100
  double worst_residual = 0.0;
  bool monotone = true, regimes = true;
  for (const auto& m : models) {
    regimes = regimes && asymptotic_throughput(m, BlockRatio::finite(0.0)).beta_c == 0.0 &&
              asymptotic_throughput(m, BlockRatio::infinite()).beta_c == m.success_prob();
    double prev = 0.0;
    for (double c : grid) {
      auto r = asymptotic_throughput(m, BlockRatio::finite(c));
      worst_residual = std::max(worst_residual, std::abs(c * rate_function(m, r.beta_c).value - r.beta_c));
      monotone = monotone && r.beta_c >= prev;
      prev = r.beta_c;
    }
  }
  double worst_cross = 0.0;
  for (double g : {0.1, 0.25, 0.5, 0.75, 0.9})
    for (double c : grid)
      worst_cross = std::max(worst_cross, std::abs(asymptotic_throughput(memoryless(g), BlockRatio::finite(c)).beta_c -
                                                   memoryless_asymptotic(g, c)));
  out.passed = worst_residual <= 1e-8 && regimes && monotone && worst_cross <= 1e-9;
  out.detail = fmt("max |c Lambda - beta_c| = %.1e; R(0)=0 and R(inf)=gamma: %s; monotone on 20-point grid: %s; "
                   "memoryless cross-path %.1e",
                   worst_residual, regimes ? "yes" : "no", monotone ? "yes" : "no", worst_cross);
  return out;
}

Outcome finite_bound_validity()
{
  Outcome out;
  int above = 0, total = 0, hard_violations = 0;
  double min_margin_se = 1e300;
  std::string tightest;
  struct Channel
  {
    const char* name;
    ChannelModel model;
  };
  for (const auto& ch : {Channel{"GE(0.4,0.4)", gilbert_elliott(0.4, 0.4)}, Channel{"mem(0.5)", memoryless(0.5)}})
    for (long long n : {2, 4, 8, 16})
      for (int k : {5, 10, 20, 40}) {
        SimulationOptions opts;
        opts.salt = static_cast<std::uint64_t>(n * 1000 + k);
        auto est = estimate_throughput(ch.model, n, k, 20'000, 4, opts);
        const double bound = finite_lower_bound(ch.model, n, k).our_bound;
        ++total;
        if (est.eta_hat > bound)
          ++above;
        if (est.eta_hat + 3.0 * est.std_error < bound)
          ++hard_violations;
        const double margin = (est.eta_hat - bound) / est.std_error;
        if (margin < min_margin_se) {
          min_margin_se = margin;
          tightest = fmt("%s n=%lld k=%d", ch.name, n, k);
        }
      }
  out.passed = above == total && hard_violations == 0;
  out.detail = fmt("eta_hat > bound in %d/%d cells, %d beyond 3 SE below; smallest margin %.1f SE at %s", above,
                   total, hard_violations, min_margin_se, tightest.c_str());
  return out;
}

Outcome asymptotic_tightness()
{
  Outcome out;
  const auto model = memoryless(0.5);
  const double c = 15.0 / std::numbers::ln2;
  std::vector<double> eta, se, gap;
  std::string values;
  for (int k : {15, 30, 60, 120}) {
    const long long n = receivers_for_ratio(k, c);
    auto est = estimate_throughput(model, n, k, 200'000, 5);
    const double bound = finite_lower_bound(model, n, k).our_bound;
    eta.push_back(est.eta_hat);
    se.push_back(est.std_error);
    gap.push_back(est.eta_hat - bound);
    values += fmt(" k=%d:%.5f", k, est.eta_hat);
  }
  int decisive = 0, inconclusive = 0;
  bool decreasing = true, shrinking = true;
  for (std::size_t i = 0; i + 1 < eta.size(); ++i) {
    if (eta[i + 1] > eta[i])
      decreasing = false;
    else if (eta[i] - 3.0 * se[i] > eta[i + 1] + 3.0 * se[i + 1])
      ++decisive;
    else
      ++inconclusive;
    if (gap[i + 1] >= gap[i])
      shrinking = false;
  }
  out.passed = decreasing && shrinking;
  out.detail = fmt("eta_hat%s; decreasing: %s (%d decisive, %d inconclusive steps); gap to bound shrinking: %s",
                   values.c_str(), decreasing ? "yes" : "no", decisive, inconclusive, shrinking ? "yes" : "no");
  return out;
}

Outcome first_success_dominance()
{
  Outcome out;
  int checked = 0, bad = 0;
  double worst = -1e300;
  for (double p01 : {0.2, 0.4, 0.7})
    for (double p10 : {0.2, 0.4, 0.7}) {
      GilbertElliott ge{p01, p10};
      const int k0 = k_zero(p01, p10);
      auto sums = first_success_times(ge, 1, 100'000, 6, k0 + 1);
      auto zero = first_success_times(ge, 0, 100'000, 6, 1);
      for (int t = 1; t <= 50; ++t) {
        const double slack = 3.0 * std::hypot(sums.tail_se(t), zero.tail_se(t));
        const double shortfall = zero.tail(t) - sums.tail(t);
        ++checked;
        if (shortfall > slack)
          ++bad;
        worst = std::max(worst, shortfall - slack);
      }
    }
  out.passed = bad == 0;
  out.detail = fmt("%d/%d (grid point, t) pairs dominate within 3 SE; worst excess %.2e", checked - bad, checked,
                   worst);
  return out;
}

Outcome block_scaling_ordering()
{
  Outcome out;
  const auto model = memoryless(0.5);
  struct Point
  {
    long long n;
    int k;
  };
  std::vector<ThroughputEstimate> est;
  for (auto [n, k] : {Point{2, 5}, Point{4, 10}, Point{16, 20}})
    est.push_back(estimate_throughput(model, n, k, 100'000, 7));
  bool ordered = true;
  for (std::size_t i = 0; i + 1 < est.size(); ++i)
    ordered = ordered && est[i].eta_hat - 3.0 * est[i].std_error > est[i + 1].eta_hat + 3.0 * est[i + 1].std_error;
  out.passed = ordered;
  out.detail = fmt("eta(2,5)=%.5f+-%.5f, eta(4,10)=%.5f+-%.5f, eta(16,20)=%.5f+-%.5f (3 SE intervals %s)",
                   est[0].eta_hat, 3 * est[0].std_error, est[1].eta_hat, 3 * est[1].std_error, est[2].eta_hat,
                   3 * est[2].std_error, ordered ? "disjoint and ordered" : "not separated");
  return out;
}

Outcome cse_comparison()
{
  Outcome out;
  int compared = 0, beaten = 0, e2_rows = 0, e2_absent = 0;
  for (const char* name : {"example1", "example3c"}) {
    auto c = preset(name);
    c.toggles.simulate = false;
    for (const auto& r : run_experiment(c)) {
      if (!r.cse1)
        continue;
      ++compared;
      if (r.our_bound && *r.our_bound > *r.cse1)
        ++beaten;
    }
  }
  auto e2 = preset("example2");
  e2.toggles.simulate = false;
  for (const auto& r : run_experiment(e2)) {
    ++e2_rows;
    if (!r.cse1 && !r.cse2)
      ++e2_absent;
  }
  out.passed = compared > 0 && beaten == compared && e2_absent == e2_rows;
  out.detail = fmt("our_bound > cse1 in %d/%d valid example1/example3c rows; example2 rows with both CSE bounds "
                   "absent: %d/%d",
                   beaten, compared, e2_absent, e2_rows);
  return out;
}

std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in{p, std::ios::binary};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism()
{
  Outcome out;
  const auto root = std::filesystem::temp_directory_path() / "rbcast_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::string bodies[3];
  int jobs[3] = {1, 1, 4};
  for (int i = 0; i < 3; ++i) {
    const auto dir = root / std::to_string(i);
    const std::string cmd = std::string{RBCAST_CLI_PATH} + " experiment --preset example2 --seed 7 --jobs " +
                            std::to_string(jobs[i]) + " --out-dir " + dir.string() + " 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) {
      out.passed = false;
      out.detail = "CLI run failed: " + cmd;
      return out;
    }
    bodies[i] = slurp(dir / "example2.csv");
  }
  std::filesystem::remove_all(root);
  const bool same_twice = !bodies[0].empty() && bodies[0] == bodies[1];
  const bool same_jobs = bodies[0] == bodies[2];
  out.passed = same_twice && same_jobs;
  out.detail = fmt("repeat run identical: %s; --jobs 1 vs 4 identical: %s (%zu bytes)", same_twice ? "yes" : "no",
                   same_jobs ? "yes" : "no", bodies[0].size());
  return out;
}

} // namespace

int main()
{
  const std::vector<Criterion> criteria = {
    {1, "exact-oracle agreement", 120.0, exact_oracle_agreement},
    {2, "spectral correctness", 10.0, spectral_correctness},
    {3, "asymptotic solver", 10.0, asymptotic_solver},
    {4, "finite bound validity", 600.0, finite_bound_validity},
    {5, "asymptotic tightness", 600.0, asymptotic_tightness},
    {6, "first-success dominance", 60.0, first_success_dominance},
    {7, "block scaling ordering", 300.0, block_scaling_ordering},
    {8, "CSE comparison", 60.0, cse_comparison},
    {9, "determinism", 1e300, determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string{"exception: "} + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool ok = o.passed && in_time;
    failed += ok ? 0 : 1;
    std::string timing = c.budget_s < 1e300 ? fmt("%.1f s of %.0f s", secs, c.budget_s) : fmt("%.1f s", secs);
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << "): " << o.detail << " ["
              << timing << (in_time ? "" : ", over budget") << "]" << std::endl;
  }
  std::cout << (failed == 0 ? "all acceptance criteria passed" : fmt("%d acceptance criteria failed", failed))
            << std::endl;
  return failed == 0 ? 0 : 1;
}
