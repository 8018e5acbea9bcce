#pragma once

// Declarative experiment sweeps: channel, (n, k) schedule, budgets and
// outputs. Results are emitted as a CSV table plus a JSON manifest that echoes
// the configuration.

#include "rbcast/bounds.hpp"
#include "rbcast/channel.hpp"
#include "rbcast/simulator.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rbcast {

inline constexpr int kCsvSchemaVersion = 1;

struct ChannelSpec
{
  enum class Kind
  {
    memoryless,
    gilbert_elliott,
    matrix,
  };

  Kind kind = Kind::memoryless;
  double gamma = 0.5;
  double p01 = 0.0;
  double p10 = 0.0;
  int order = 0;
  std::vector<std::vector<double>> rows;

  static ChannelSpec memoryless(double gamma);
  static ChannelSpec gilbert_elliott(double p01, double p10);

  /// "mem:0.5", "ge:0.4,0.4", or a JSON channel block.
  static ChannelSpec parse(std::string_view text);

  ChannelModel model() const;
  std::string label() const;

  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

struct SchedulePoint
{
  long long n = 0;
  int k = 0;

  friend bool operator==(const SchedulePoint&, const SchedulePoint&) = default;
};

/// Either explicit (n, k) pairs or the rule n = max(2, round(exp(k / ratio_c))).
struct Schedule
{
  std::vector<SchedulePoint> pairs;
  std::optional<double> ratio_c;
  std::vector<int> k_list;

  std::vector<SchedulePoint> points() const;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

long long receivers_for_ratio(int k, double ratio_c);

struct Toggles
{
  bool bounds = true;
  bool simulate = true;
  bool cse = true;
  Cse1Numerator cse1_numerator = Cse1Numerator::one_minus_gamma;

  friend bool operator==(const Toggles&, const Toggles&) = default;
};

struct OutputPaths
{
  std::string csv;
  std::string manifest;

  friend bool operator==(const OutputPaths&, const OutputPaths&) = default;
};

struct ExperimentConfig
{
  std::string name;
  ChannelSpec channel;
  Schedule schedule;
  long long blocks = 20'000;
  std::uint64_t seed = 1;
  OutputPaths outputs;
  Toggles toggles;
  Engine engine = Engine::automatic;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

void to_json(nlohmann::json& j, const ChannelSpec& spec);
void from_json(const nlohmann::json& j, ChannelSpec& spec);
void to_json(nlohmann::json& j, const ExperimentConfig& config);
void from_json(const nlohmann::json& j, ExperimentConfig& config);

ExperimentConfig load_config(const std::string& path);

std::vector<std::string> preset_names();
ExperimentConfig preset(std::string_view name);

struct ResultRow
{
  long long n = 0;
  int k = 0;
  std::optional<double> eta_hat;
  std::optional<double> se;
  std::optional<double> our_bound;
  std::optional<double> cse1;
  std::optional<double> cse2;
  std::optional<double> asymptotic;
  /// Reported in the manifest only, so CSV bodies stay reproducible.
  double wall_time_ms = 0.0;
};

/// Evaluates every schedule point (up to `jobs` at a time); rows come back in
/// schedule order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, int jobs = 1);

std::string csv_header();
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
nlohmann::json make_manifest(const ExperimentConfig& config, const std::vector<ResultRow>& rows);

/// run_experiment plus the CSV and manifest files named in config.outputs.
std::vector<ResultRow> run_and_write(const ExperimentConfig& config, int jobs = 1);

std::string version_string();

/// Shortest round-trip decimal form; "" for absent values.
std::string format_number(std::optional<double> v);

} // namespace rbcast
