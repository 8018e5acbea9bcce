#include "rbcast/experiment.hpp"

#include "rbcast/asymptotic.hpp"
#include "parallel.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#ifndef RBCAST_VERSION
#define RBCAST_VERSION "0.1.0"
#endif

namespace rbcast {

namespace {

using nlohmann::json;

std::vector<int> step_range(int first, int last, int step)
{
  std::vector<int> out;
  for (int v = first; v <= last; v += step)
    out.push_back(v);
  return out;
}

const char* numerator_name(Cse1Numerator n)
{
  return n == Cse1Numerator::gamma ? "gamma" : "one_minus_gamma";
}

Cse1Numerator numerator_from_name(const std::string& s)
{
  if (s == "one_minus_gamma")
    return Cse1Numerator::one_minus_gamma;
  if (s == "gamma")
    return Cse1Numerator::gamma;
  throw std::invalid_argument("cse1_numerator must be \"one_minus_gamma\" or \"gamma\"");
}

void validate(const ExperimentConfig& config)
{
  if (config.schedule.points().empty())
    throw std::invalid_argument("experiment schedule is empty");
  if (config.toggles.simulate && config.blocks < 100)
    throw std::invalid_argument("blocks must be >= 100");
}

ResultRow evaluate_point(const ExperimentConfig& config, const ChannelModel& model, SchedulePoint pt,
                         std::size_t index)
{
  auto started = std::chrono::steady_clock::now();
  ResultRow row;
  row.n = pt.n;
  row.k = pt.k;

  if (config.toggles.bounds) {
    if (model.order() <= 1) {
      BoundOptions opts{config.toggles.cse1_numerator};
      row.our_bound = finite_lower_bound(model, pt.n, pt.k, opts).our_bound;
    }
    row.asymptotic = pt.n == 1
                       ? model.success_prob()
                       : asymptotic_throughput(model, BlockRatio::finite(pt.k / std::log(static_cast<double>(pt.n))))
                           .beta_c;
  }
  if (config.toggles.cse) {
    if (model.is_memoryless())
      row.cse1 = cse_bound_1(model.success_prob(), pt.n, pt.k, config.toggles.cse1_numerator);
    if (auto ge = as_gilbert_elliott(model))
      row.cse2 = cse_bound_2(*ge, pt.n, pt.k);
  }
  if (config.toggles.simulate) {
    SimulationOptions opts;
    opts.engine = config.engine;
    opts.salt = index;
    auto est = estimate_throughput(model, pt.n, pt.k, config.blocks, config.seed, opts);
    row.eta_hat = est.eta_hat;
    row.se = est.std_error;
  }

  std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - started;
  row.wall_time_ms = elapsed.count();
  return row;
}

} // namespace

std::string format_number(std::optional<double> v)
{
  if (!v)
    return {};
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, *v);
  return {buf, res.ptr};
}

std::string version_string()
{
  return RBCAST_VERSION;
}

ChannelSpec ChannelSpec::memoryless(double gamma)
{
  ChannelSpec s;
  s.kind = Kind::memoryless;
  s.gamma = gamma;
  return s;
}

ChannelSpec ChannelSpec::gilbert_elliott(double p01, double p10)
{
  ChannelSpec s;
  s.kind = Kind::gilbert_elliott;
  s.gamma = 0.0;
  s.p01 = p01;
  s.p10 = p10;
  s.order = 1;
  return s;
}

ChannelSpec ChannelSpec::parse(std::string_view text)
{
  auto number = [&](std::string_view part) {
    double v = 0.0;
    auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (res.ec != std::errc{} || res.ptr != part.data() + part.size())
      throw std::invalid_argument("malformed channel number: " + std::string{part});
    return v;
  };

  if (!text.empty() && text.front() == '{') {
    try {
      return json::parse(text).get<ChannelSpec>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string{"malformed channel block: "} + e.what());
    }
  }
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("channel must look like mem:GAMMA or ge:P01,P10");
  auto kind = text.substr(0, colon);
  auto args = text.substr(colon + 1);
  if (kind == "mem" || kind == "memoryless")
    return memoryless(number(args));
  if (kind == "ge" || kind == "gilbert_elliott") {
    auto comma = args.find(',');
    if (comma == std::string_view::npos)
      throw std::invalid_argument("gilbert-elliott channel needs ge:P01,P10");
    return gilbert_elliott(number(args.substr(0, comma)), number(args.substr(comma + 1)));
  }
  throw std::invalid_argument("unknown channel kind: " + std::string{kind});
}

ChannelModel ChannelSpec::model() const
{
  switch (kind) {
  case Kind::memoryless:
    return rbcast::memoryless(gamma);
  case Kind::gilbert_elliott:
    return rbcast::gilbert_elliott(p01, p10);
  case Kind::matrix:
    return from_transition(order, rows);
  }
  throw std::logic_error("unreachable channel kind");
}

std::string ChannelSpec::label() const
{
  switch (kind) {
  case Kind::memoryless:
    return "mem:" + format_number(gamma);
  case Kind::gilbert_elliott:
    return "ge:" + format_number(p01) + "," + format_number(p10);
  case Kind::matrix:
    return "matrix:l=" + std::to_string(order);
  }
  return {};
}

void to_json(json& j, const ChannelSpec& spec)
{
  switch (spec.kind) {
  case ChannelSpec::Kind::memoryless:
    j = json{{"kind", "memoryless"}, {"gamma", spec.gamma}};
    break;
  case ChannelSpec::Kind::gilbert_elliott:
    j = json{{"kind", "gilbert_elliott"}, {"p01", spec.p01}, {"p10", spec.p10}};
    break;
  case ChannelSpec::Kind::matrix:
    j = json{{"kind", "matrix"}, {"l", spec.order}, {"rows", spec.rows}};
    break;
  }
}

void from_json(const json& j, ChannelSpec& spec)
{
  auto kind = j.at("kind").get<std::string>();
  if (kind == "memoryless")
    spec = ChannelSpec::memoryless(j.at("gamma").get<double>());
  else if (kind == "gilbert_elliott")
    spec = ChannelSpec::gilbert_elliott(j.at("p01").get<double>(), j.at("p10").get<double>());
  else if (kind == "matrix") {
    spec = ChannelSpec{};
    spec.kind = ChannelSpec::Kind::matrix;
    spec.gamma = 0.0;
    spec.order = j.at("l").get<int>();
    spec.rows = j.at("rows").get<std::vector<std::vector<double>>>();
  } else
    throw std::invalid_argument("unknown channel kind: " + kind);
}

void to_json(json& j, const ExperimentConfig& c)
{
  json schedule = json::object();
  if (!c.schedule.pairs.empty()) {
    json pairs = json::array();
    for (auto p : c.schedule.pairs)
      pairs.push_back({p.n, p.k});
    schedule["pairs"] = pairs;
  }
  if (c.schedule.ratio_c) {
    schedule["ratio_c"] = *c.schedule.ratio_c;
    schedule["k_list"] = c.schedule.k_list;
  }
  j = json{
    {"name", c.name},
    {"channel", c.channel},
    {"schedule", schedule},
    {"blocks", c.blocks},
    {"seed", c.seed},
    {"outputs", {{"csv", c.outputs.csv}, {"manifest", c.outputs.manifest}}},
    {"toggles",
     {{"bounds", c.toggles.bounds},
      {"simulate", c.toggles.simulate},
      {"cse", c.toggles.cse},
      {"cse1_numerator", numerator_name(c.toggles.cse1_numerator)}}},
    {"engine", std::string{to_string(c.engine)}},
  };
}

void from_json(const json& j, ExperimentConfig& c)
{
  c = ExperimentConfig{};
  c.name = j.value("name", std::string{});
  c.channel = j.at("channel").get<ChannelSpec>();
  const auto& sched = j.at("schedule");
  if (sched.contains("pairs"))
    for (const auto& p : sched.at("pairs")) {
      if (p.is_object())
        c.schedule.pairs.push_back({p.at("n").get<long long>(), p.at("k").get<int>()});
      else
        c.schedule.pairs.push_back({p.at(0).get<long long>(), p.at(1).get<int>()});
    }
  if (sched.contains("ratio_c")) {
    c.schedule.ratio_c = sched.at("ratio_c").get<double>();
    c.schedule.k_list = sched.at("k_list").get<std::vector<int>>();
  }
  c.blocks = j.value("blocks", c.blocks);
  c.seed = j.value("seed", c.seed);
  if (j.contains("outputs")) {
    c.outputs.csv = j["outputs"].value("csv", std::string{});
    c.outputs.manifest = j["outputs"].value("manifest", std::string{});
  }
  if (j.contains("toggles")) {
    const auto& t = j["toggles"];
    c.toggles.bounds = t.value("bounds", true);
    c.toggles.simulate = t.value("simulate", true);
    c.toggles.cse = t.value("cse", true);
    c.toggles.cse1_numerator = numerator_from_name(t.value("cse1_numerator", std::string{"one_minus_gamma"}));
  }
  c.engine = engine_from_string(j.value("engine", std::string{"auto"}));
}

ExperimentConfig load_config(const std::string& path)
{
  std::ifstream in{path};
  if (!in)
    throw std::runtime_error("cannot open config file: " + path);
  try {
    return json::parse(in).get<ExperimentConfig>();
  } catch (const json::exception& e) {
    throw std::invalid_argument("malformed config " + path + ": " + e.what());
  }
}

long long receivers_for_ratio(int k, double ratio_c)
{
  if (!(ratio_c > 0.0))
    throw std::invalid_argument("ratio_c must be positive");
  double n = std::round(std::exp(static_cast<double>(k) / ratio_c));
  if (!(n < 4.0e9))
    throw std::invalid_argument("schedule rule implies too many receivers");
  return std::max<long long>(2, static_cast<long long>(n));
}

std::vector<SchedulePoint> Schedule::points() const
{
  std::vector<SchedulePoint> out = pairs;
  if (ratio_c)
    for (int k : k_list)
      out.push_back({receivers_for_ratio(k, *ratio_c), k});
  for (auto p : out)
    if (p.n < 1 || p.k < 1)
      throw std::invalid_argument("schedule points need n >= 1 and k >= 1");
  return out;
}

std::vector<std::string> preset_names()
{
  return {"example1", "example2", "example3a", "example3b", "example3c"};
}

ExperimentConfig preset(std::string_view name)
{
  ExperimentConfig c;
  c.name = std::string{name};
  c.outputs.csv = c.name + ".csv";
  c.outputs.manifest = c.name + ".manifest.json";
  if (name == "example1") {
    c.channel = ChannelSpec::memoryless(0.5);
    c.schedule.ratio_c = 15.0 / std::numbers::ln2;
    c.schedule.k_list = step_range(5, 300, 5);
  } else if (name == "example2") {
    c.channel = ChannelSpec::gilbert_elliott(0.4, 0.4);
    c.schedule.ratio_c = 5.0 / std::numbers::ln2;
    c.schedule.k_list = step_range(5, 100, 5);
  } else if (name == "example3a") {
    c.channel = ChannelSpec::memoryless(0.5);
    for (int n : step_range(5, 300, 5))
      c.schedule.pairs.push_back({n, n});
  } else if (name == "example3b") {
    c.channel = ChannelSpec::memoryless(0.5);
    for (int k : step_range(5, 300, 5))
      c.schedule.pairs.push_back({10, k});
  } else if (name == "example3c") {
    c.channel = ChannelSpec::memoryless(0.5);
    for (int n : step_range(5, 100, 5))
      c.schedule.pairs.push_back({n, 80});
  } else {
    throw std::invalid_argument("unknown preset: " + std::string{name});
  }
  return c;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, int jobs)
{
  validate(config);
  const auto model = config.channel.model();
  const auto points = config.schedule.points();
  std::vector<ResultRow> rows(points.size());
  detail::parallel_for(points.size(), jobs,
                       [&](std::size_t i) { rows[i] = evaluate_point(config, model, points[i], i); });
  return rows;
}

std::string csv_header()
{
  return "n,k,eta_hat,se,our_bound,cse1,cse2,asymptotic";
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows)
{
  out << csv_header() << '\n';
  for (const auto& r : rows) {
    out << r.n << ',' << r.k << ',' << format_number(r.eta_hat) << ',' << format_number(r.se) << ','
        << format_number(r.our_bound) << ',' << format_number(r.cse1) << ',' << format_number(r.cse2) << ','
        << format_number(r.asymptotic) << '\n';
  }
}

nlohmann::json make_manifest(const ExperimentConfig& config, const std::vector<ResultRow>& rows)
{
  json points = json::array();
  for (const auto& r : rows)
    points.push_back({{"n", r.n}, {"k", r.k}, {"wall_time_ms", r.wall_time_ms}});
  return json{
    {"version", version_string()},
    {"csv_schema", kCsvSchemaVersion},
    {"columns", {"n", "k", "eta_hat", "se", "our_bound", "cse1", "cse2", "asymptotic"}},
    {"seed", config.seed},
    {"n_rule", "n = max(2, round(exp(k / ratio_c)))"},
    {"config", config},
    {"points", points},
  };
}

std::vector<ResultRow> run_and_write(const ExperimentConfig& config, int jobs)
{
  std::ofstream csv, manifest;
  if (!config.outputs.csv.empty()) {
    csv.open(config.outputs.csv);
    if (!csv)
      throw std::runtime_error("cannot write " + config.outputs.csv);
  }
  if (!config.outputs.manifest.empty()) {
    manifest.open(config.outputs.manifest);
    if (!manifest)
      throw std::runtime_error("cannot write " + config.outputs.manifest);
  }

  auto rows = run_experiment(config, jobs);
  if (csv.is_open())
    write_csv(csv, rows);
  if (manifest.is_open())
    manifest << make_manifest(config, rows).dump(2) << '\n';
  return rows;
}

} // namespace rbcast
