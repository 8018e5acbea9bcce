// rbcast: throughput of rateless-coded broadcast over Markov erasure channels.
//
//   rbcast analyze --channel ge:0.4,0.4 --k0 --rate-fn 0.25 --asymptotic inf
//   rbcast analyze --channel mem:0.5 --bounds --n 2,4,8 --k 5,10
//   rbcast simulate --channel ge:0.4,0.4 --n 2 --k 5 --blocks 20000
//   rbcast experiment --preset example2 --seed 7 --jobs 4
//   rbcast selftest
//
// Exit codes: 0 ok, 1 usage error, 2 runtime error.

#include "rbcast/asymptotic.hpp"
#include "rbcast/bounds.hpp"
#include "rbcast/experiment.hpp"
#include "rbcast/selftest.hpp"
#include "rbcast/simulator.hpp"
#include "rbcast/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace {

using namespace rbcast;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> env_seed()
{
  const char* v = std::getenv("RB_SEED");
  if (v == nullptr || *v == '\0')
    return std::nullopt;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw UsageError{"RB_SEED must be a non-negative integer"};
  }
}

Cse1Numerator parse_numerator(const std::string& s)
{
  if (s == "gamma")
    return Cse1Numerator::gamma;
  if (s == "one_minus_gamma")
    return Cse1Numerator::one_minus_gamma;
  throw UsageError{"--cse1-numerator must be one_minus_gamma or gamma"};
}

ChannelSpec parse_channel(const std::string& text)
{
  std::string body = text;
  if (!body.empty() && body.front() == '@') {
    std::ifstream in{body.substr(1)};
    if (!in)
      throw UsageError{"cannot read channel file " + body.substr(1)};
    std::stringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  try {
    return ChannelSpec::parse(body);
  } catch (const std::exception& e) {
    throw UsageError{e.what()};
  }
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs
{
  std::string channel;
  bool k0 = false;
  std::vector<double> betas;
  std::vector<std::string> ratios;
  std::string bound;
  bool bounds_table = false;
  std::vector<long long> ns;
  std::vector<int> ks;
  std::string numerator = "one_minus_gamma";
  bool as_json = false;
};

std::string bound_csv_header()
{
  return "n,k,k0,ratio,our_bound,cse1,cse1_valid,cse2,cse2_valid";
}

std::string bound_csv_row(const BoundReport& r)
{
  std::ostringstream os;
  os << r.n << ',' << r.k << ',' << r.k_zero << ',' << format_number(r.ratio) << ',' << format_number(r.our_bound)
     << ',' << format_number(r.cse1) << ',' << (r.cse1 ? 1 : 0) << ',' << format_number(r.cse2) << ','
     << (r.cse2 ? 1 : 0);
  return os.str();
}

json report_json(const BoundReport& r)
{
  json j{{"n", r.n},           {"k", r.k},
         {"k0", r.k_zero},     {"ratio", r.ratio},
         {"our_bound", r.our_bound}, {"asymptotic_ref", r.asymptotic_ref},
         {"degenerate", r.degenerate}};
  j["cse1"] = r.cse1 ? json(*r.cse1) : json(nullptr);
  j["cse2"] = r.cse2 ? json(*r.cse2) : json(nullptr);
  return j;
}

int run_analyze(const AnalyzeArgs& args)
{
  const auto spec = parse_channel(args.channel);
  const auto model = spec.model();
  BoundOptions opts{parse_numerator(args.numerator)};

  if (args.bounds_table) {
    if (args.ns.empty() || args.ks.empty())
      throw UsageError{"--bounds needs --n and --k lists"};
    std::cout << bound_csv_header() << '\n';
    for (auto n : args.ns)
      for (auto k : args.ks)
        std::cout << bound_csv_row(finite_lower_bound(model, n, k, opts)) << '\n';
    return 0;
  }

  // (label, value) rows in request order, mirrored into JSON.
  std::vector<std::pair<std::string, std::string>> table;
  json out{{"channel", spec.label()}, {"gamma", model.success_prob()}};
  table.emplace_back("channel", spec.label());
  table.emplace_back("gamma", format_number(model.success_prob()));

  if (args.k0) {
    auto ge = as_gilbert_elliott(model);
    if (!ge)
      throw UsageError{"--k0 needs a memoryless or Gilbert-Elliott channel"};
    int k0 = model.order() == 0 ? 0 : k_zero(ge->p01, ge->p10);
    out["k0"] = k0;
    table.emplace_back("k0", std::to_string(k0));
  }
  for (double beta : args.betas) {
    auto eval = rate_function(model, beta);
    out["rate_function"].push_back({{"beta", beta},
                                    {"value", eval.value},
                                    {"theta_star", eval.theta_star},
                                    {"boundary", eval.boundary},
                                    {"capped", eval.capped}});
    table.emplace_back("rate_fn(" + format_number(beta) + ")", format_number(eval.value));
  }
  for (const auto& text : args.ratios) {
    BlockRatio c = BlockRatio::infinite();
    if (text != "inf") {
      try {
        c = BlockRatio::finite(std::stod(text));
      } catch (const std::invalid_argument&) {
        throw UsageError{"--asymptotic takes a number >= 0 or inf"};
      }
    }
    auto res = asymptotic_throughput(model, c);
    out["asymptotic"].push_back({{"c", text}, {"beta_c", res.beta_c}, {"attained", res.attained},
                                 {"residual", res.residual}});
    table.emplace_back("asymptotic(" + text + ")", format_number(res.beta_c));
  }
  if (!args.bound.empty()) {
    auto comma = args.bound.find(',');
    if (comma == std::string::npos)
      throw UsageError{"--bound takes N,K"};
    long long n = std::stoll(args.bound.substr(0, comma));
    long long k = std::stoll(args.bound.substr(comma + 1));
    auto rep = finite_lower_bound(model, n, k, opts);
    out["bound"] = report_json(rep);
    table.emplace_back("bound(" + args.bound + ")", format_number(rep.our_bound));
    table.emplace_back("cse1(" + args.bound + ")", rep.cse1 ? format_number(rep.cse1) : "n/a");
    table.emplace_back("cse2(" + args.bound + ")", rep.cse2 ? format_number(rep.cse2) : "n/a");
  }

  if (args.as_json) {
    std::cout << out.dump(2) << '\n';
    return 0;
  }
  std::size_t width = 0;
  for (const auto& [label, _] : table)
    width = std::max(width, label.size());
  for (const auto& [label, value] : table)
    std::cout << label << std::string(width + 2 - label.size(), ' ') << value << '\n';
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs
{
  std::string channel;
  long long n = 1;
  int k = 1;
  long long trials = 10'000;
  long long blocks = 10'000;
  std::optional<std::uint64_t> seed;
  std::string init = "stationary";
  std::string engine = "auto";
  int jobs = 1;
  std::string dump_trials;
  std::string csv;
};

int run_simulate(const SimulateArgs& args)
{
  const auto spec = parse_channel(args.channel);
  const auto model = spec.model();
  std::uint64_t seed = args.seed ? *args.seed : env_seed().value_or(1);

  InitPolicy init;
  if (args.init == "stationary")
    init = InitPolicy::stationary();
  else if (args.init == "ones")
    init = InitPolicy::all_ones();
  else if (args.init == "burn_in")
    init = InitPolicy::burn_in();
  else
    throw UsageError{"--init must be stationary, ones or burn_in"};

  SimulationOptions opts;
  opts.engine = engine_from_string(args.engine);
  opts.jobs = args.jobs;

  std::optional<CompletionStats> completion;
  if (args.trials > 0) {
    auto times = sample_completion_times(model, args.n, args.k, init, args.trials, seed, opts);
    completion = summarize_completion(times);
    if (!args.dump_trials.empty()) {
      std::ofstream dump{args.dump_trials};
      if (!dump)
        throw std::runtime_error("cannot write " + args.dump_trials);
      for (auto t : times)
        dump << t << '\n';
    }
  }
  std::optional<ThroughputEstimate> renewal;
  if (args.blocks > 0)
    renewal = estimate_throughput(model, args.n, args.k, args.blocks, seed, opts);

  std::ofstream file;
  if (!args.csv.empty()) {
    file.open(args.csv);
    if (!file)
      throw std::runtime_error("cannot write " + args.csv);
  }
  std::ostream& out = args.csv.empty() ? std::cout : file;

  auto opt = [](bool present, double v) { return present ? std::optional<double>{v} : std::nullopt; };
  const bool ge_params = spec.kind == ChannelSpec::Kind::gilbert_elliott;
  const char* kind = spec.kind == ChannelSpec::Kind::memoryless ? "memoryless" : ge_params ? "gilbert_elliott" : "matrix";
  out << "n,k,channel,gamma,p01,p10,seed,trials,blocks,mean_T,se_T,eta_hat,se_eta\n";
  out << args.n << ',' << args.k << ',' << kind << ',' << format_number(model.success_prob()) << ','
      << format_number(opt(ge_params, spec.p01)) << ',' << format_number(opt(ge_params, spec.p10)) << ',' << seed
      << ',' << args.trials << ',' << args.blocks << ','
      << format_number(opt(completion.has_value(), completion ? completion->mean : 0.0)) << ','
      << format_number(opt(completion.has_value(), completion ? completion->std_error : 0.0)) << ','
      << format_number(opt(renewal.has_value(), renewal ? renewal->eta_hat : 0.0)) << ','
      << format_number(opt(renewal.has_value(), renewal ? renewal->std_error : 0.0)) << '\n';
  return 0;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs
{
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long long> blocks;
  int jobs = 1;
  std::string out_dir;
  std::string csv;
  std::string manifest;
  bool no_simulate = false;
  bool no_bounds = false;
  std::string engine;
};

int run_experiment_cmd(const ExperimentArgs& args)
{
  if (args.preset.empty() == args.config.empty())
    throw UsageError{"experiment needs exactly one of --preset or --config"};

  ExperimentConfig config;
  try {
    config = args.preset.empty() ? load_config(args.config) : preset(args.preset);
  } catch (const std::invalid_argument& e) {
    throw UsageError{e.what()};
  }

  if (auto s = env_seed())
    config.seed = *s;
  if (args.seed)
    config.seed = *args.seed;
  if (args.blocks)
    config.blocks = *args.blocks;
  if (args.no_simulate)
    config.toggles.simulate = false;
  if (args.no_bounds)
    config.toggles.bounds = false;
  if (!args.engine.empty())
    config.engine = engine_from_string(args.engine);
  const std::string stem = config.name.empty() ? "experiment" : config.name;
  if (config.outputs.csv.empty())
    config.outputs.csv = stem + ".csv";
  if (config.outputs.manifest.empty())
    config.outputs.manifest = stem + ".manifest.json";
  if (!args.csv.empty())
    config.outputs.csv = args.csv;
  if (!args.manifest.empty())
    config.outputs.manifest = args.manifest;
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    auto place = [&](std::string& path) {
      if (!path.empty())
        path = (std::filesystem::path{args.out_dir} / std::filesystem::path{path}.filename()).string();
    };
    place(config.outputs.csv);
    place(config.outputs.manifest);
  }

  auto rows = run_and_write(config, args.jobs);
  std::cerr << "wrote " << rows.size() << " rows to " << config.outputs.csv << " (manifest "
            << config.outputs.manifest << ")\n";
  return 0;
}

// ---------------------------------------------------------------- selftest

int run_selftest_cmd()
{
  int failed = 0;
  for (const auto& r : run_selftest()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) {
      std::cout << ": " << r.detail;
      ++failed;
    }
    std::cout << '\n';
  }
  return failed == 0 ? 0 : kExitRuntime;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Throughput of rateless-coded broadcast over Markov erasure channels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rbcast::version_string());

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Evaluate rate function, asymptotic throughput, K0 and bounds");
  an->add_option("--channel", analyze.channel, "mem:GAMMA | ge:P01,P10 | JSON block | @file.json")->required();
  an->add_flag("--k0", analyze.k0, "Channel-memory penalty K0");
  an->add_option("--rate-fn", analyze.betas, "Rate function at BETA (repeatable)");
  an->add_option("--asymptotic", analyze.ratios, "Asymptotic throughput at c = K/log n (number or inf)");
  an->add_option("--bound", analyze.bound, "Finite lower bound at N,K");
  an->add_flag("--bounds", analyze.bounds_table, "CSV of bound reports over --n x --k");
  an->add_option("--n", analyze.ns, "Receiver counts for --bounds")->delimiter(',');
  an->add_option("--k", analyze.ks, "Block sizes for --bounds")->delimiter(',');
  an->add_option("--cse1-numerator", analyze.numerator, "one_minus_gamma (default) or gamma");
  an->add_flag("--json", analyze.as_json, "Machine-readable output");

  SimulateArgs simulate;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo block times and renewal throughput");
  sim->add_option("--channel", simulate.channel, "mem:GAMMA | ge:P01,P10 | JSON block | @file.json")->required();
  sim->add_option("--n", simulate.n, "Receivers")->required()->check(CLI::PositiveNumber);
  sim->add_option("--k", simulate.k, "Block size")->required()->check(CLI::PositiveNumber);
  sim->add_option("--trials", simulate.trials, "Independent block trials (0 to skip)");
  sim->add_option("--blocks", simulate.blocks, "Renewal blocks (0 to skip)");
  sim->add_option("--seed", simulate.seed, "Seed (default: RB_SEED or 1)");
  sim->add_option("--init", simulate.init, "stationary | ones | burn_in");
  sim->add_option("--engine", simulate.engine, "auto | per_receiver | population");
  sim->add_option("--jobs", simulate.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sim->add_option("--dump-trials", simulate.dump_trials, "Write per-trial block times, one per line");
  sim->add_option("--csv", simulate.csv, "Output CSV (default stdout)");

  ExperimentArgs experiment;
  auto* ex = app.add_subcommand("experiment", "Run a preset or JSON-configured sweep");
  ex->add_option("--preset", experiment.preset, "example1 | example2 | example3a | example3b | example3c");
  ex->add_option("--config", experiment.config, "JSON experiment config");
  ex->add_option("--seed", experiment.seed, "Override the config seed");
  ex->add_option("--blocks", experiment.blocks, "Override renewal blocks per point");
  ex->add_option("--jobs", experiment.jobs, "Schedule points evaluated in parallel")->check(CLI::PositiveNumber);
  ex->add_option("--out-dir", experiment.out_dir, "Directory for the CSV and manifest");
  ex->add_option("--csv", experiment.csv, "CSV path");
  ex->add_option("--manifest", experiment.manifest, "Manifest path");
  ex->add_flag("--no-simulate", experiment.no_simulate, "Bounds only");
  ex->add_flag("--no-bounds", experiment.no_bounds, "Simulation only");
  ex->add_option("--engine", experiment.engine, "auto | per_receiver | population");

  app.add_subcommand("selftest", "Run the built-in oracle and property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (an->parsed())
      return run_analyze(analyze);
    if (sim->parsed())
      return run_simulate(simulate);
    if (ex->parsed())
      return run_experiment_cmd(experiment);
    return run_selftest_cmd();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
