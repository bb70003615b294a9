#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cplan/agent.hpp"
#include "cplan/data_model.hpp"
#include "cplan/env.hpp"

namespace cplan {

enum class UncertaintyModel { UniformHourly, UniformEpisode };

std::string to_string(UncertaintyModel model);
UncertaintyModel parse_uncertainty_model(std::string_view text);

struct ScenarioSet {
  CurtailmentSeries base;
  double amplitude = 0.0;
  int count = 0;
  std::uint64_t seed = 0;
  UncertaintyModel model = UncertaintyModel::UniformHourly;
  std::vector<CurtailmentSeries> scenarios;
};

// Scenario i multiplies every hour of `base` (wind and solar alike) by a
// factor uniform on [1-u, 1+u]: one factor per hour, or one per scenario for
// UniformEpisode. Scenario i draws from derive_seed(seed, i), so a prefix of
// a larger set equals the smaller set.
ScenarioSet generate_scenarios(const CurtailmentSeries& base, double amplitude, int count,
                               std::uint64_t seed,
                               UncertaintyModel model = UncertaintyModel::UniformHourly);

struct RolloutResult {
  double profit = 0.0;   // objective of the applied dispatch, penalties excluded
  double penalty = 0.0;  // sum of penalty_raw * penalty_factor
  double ret = 0.0;      // sum of rewards
  long overactions = 0;
  std::vector<TraceRow> trace;
};

RolloutResult rollout(const PolicyParams& policy, std::shared_ptr<const EpisodeData> episode,
                      const EnvConfig& cfg, bool deterministic = true, std::uint64_t seed = 0,
                      std::optional<std::vector<double>> forecast = std::nullopt);

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<long> counts;
};

Histogram make_histogram(const std::vector<double>& values, int bins);

struct EvalReport {
  std::vector<double> profits;
  std::vector<double> penalties;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  Histogram histogram;
  std::optional<double> oracle_profit;
  std::optional<double> relative_to_oracle;  // mean / oracle_profit
};

// Which role the scenario series plays in each rollout.
enum class ScenarioRole {
  Actual,    // the episode's curtailment is replaced by the scenario
  Forecast,  // actual curtailment stays; the scenario feeds the EP window
};

struct MonteCarloOptions {
  int histogram_bins = 50;
  int workers = 1;
  ScenarioRole role = ScenarioRole::Actual;
  std::optional<double> oracle_profit;
};

EvalReport monte_carlo(const PolicyParams& policy, const EpisodeData& episode,
                       const ScenarioSet& set, const EnvConfig& cfg,
                       const MonteCarloOptions& options = {});

// Recomputes mean, stddev, histogram and relative profit from `profits`.
void summarize(EvalReport& report, int histogram_bins);

enum class MapAxis { Curtailment, Price };

std::string to_string(MapAxis axis);
MapAxis parse_map_axis(std::string_view text);

struct ActionMapSpec {
  std::vector<double> soc_levels;    // rows
  MapAxis axis = MapAxis::Curtailment;
  std::vector<double> axis_levels;   // columns: MWh or $/MWh for the current hour
  int samples_per_cell = 2000;
};

struct ActionMapGrid {
  ActionMapSpec spec;
  Eigen::MatrixXd bess;  // mean squashed bess action, rows = soc levels
  Eigen::MatrixXd awe;   // mean squashed awe action
  long evaluations_per_cell = 0;
};

// Each sample takes the observation of a random episode hour, sets SOC to
// the row level and the current-hour curtailment or price (EP window slot 0,
// or the newest IP slot for curtailment) to the column level, then averages
// the deterministic policy action.
ActionMapGrid action_map(const PolicyParams& policy, const Environment& env,
                         const ActionMapSpec& spec, std::uint64_t seed);

// Rank correlation with average ranks for ties; NaN if either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// The 24 trace rows of day `day` (0-based) from a deterministic rollout.
std::vector<TraceRow> day_trace(const PolicyParams& policy,
                                std::shared_ptr<const EpisodeData> episode,
                                const EnvConfig& cfg, int day);

std::string report_stem(std::string_view kind, std::string_view policy_id, std::uint64_t seed,
                        double amplitude);
std::string format_report_csv(const EvalReport& report);
std::string format_histogram_csv(const Histogram& h);
nlohmann::json report_summary(const EvalReport& report);
std::string format_action_map_csv(const ActionMapGrid& grid);

}  // namespace cplan
