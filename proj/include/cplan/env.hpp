#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cplan/data_model.hpp"
#include "cplan/plant.hpp"

namespace cplan {

// IP observes the past curtailment window, EP a forecast of the next hours.
enum class ObservationMode { IP, EP };

std::string to_string(ObservationMode mode);
ObservationMode parse_observation_mode(std::string_view text);

struct EnvConfig {
  int window_w = 24;
  double penalty_factor = 100.0;
  bool filtration_enabled = true;
  ObservationMode mode = ObservationMode::EP;

  bool operator==(const EnvConfig&) const = default;

  template <class Visitor>
  void visit_fields(Visitor&& v) {
    v("window_w", window_w);
    v("penalty_factor", penalty_factor);
    v("filtration_enabled", filtration_enabled);
    v("mode", mode);
  }
};

std::vector<std::string> validate(const EnvConfig& cfg);

// bess in [-1, 1] (positive charges), awe in [0, 1].
struct Action {
  double bess = 0.0;
  double awe = 0.0;
};

// Feature layout, W = window_w, length 2 + 3W:
//   [0]            soc fraction
//   [1]            remaining capacity fraction (1 - soc)
//   [2, 2+W)       electricity price for hours t..t+W-1 / episode max price
//   [2+W, 2+2W)    hydrogen value per MWh of electrolysis / episode max price
//   [2+2W, 2+3W)   curtailment window / bess_capacity
//                    IP: hours t-W..t-1 (zero before t=0)
//                    EP: hours t..t+W-1 (zero after the horizon)
// Windows past the horizon are zero-padded, never wrapped.
struct Observation {
  ObservationMode mode = ObservationMode::EP;
  double soc = 0.0;
  double remaining_capacity = 0.0;
  std::vector<double> prices_elec;         // $/MWh
  std::vector<double> price_h2;            // $/kg, one per window position
  std::vector<double> curtailment_window;  // MWh
  std::vector<double> features;            // normalized, layout above
};

inline constexpr std::size_t observation_length(int window_w) {
  return 2 + 3 * static_cast<std::size_t>(window_w);
}

struct StepInfo {
  bool overcharge = false;
  bool overdischarge = false;
  bool awe_exceedance = false;
  bool any() const { return overcharge || overdischarge || awe_exceedance; }
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  double penalty_raw = 0.0;  // MWh, before scaling
  Dispatch dispatch_applied;
  HourRecord record;
  bool done = false;
  StepInfo info;
};

Dispatch decode_action(const Action& a, const PlantConfig& plant);

// Overaction size in MWh for an unfiltered dispatch.
double penalty(const Dispatch& d_raw, double soc, double available_curtailment,
               const PlantConfig& plant);
StepInfo overaction_flags(const Dispatch& d_raw, double soc, double available_curtailment,
                          const PlantConfig& plant);

// Clamps a raw dispatch onto the feasible set, charging before electrolysis.
Dispatch filter_action(const Dispatch& d_raw, double soc, double available_curtailment,
                       const PlantConfig& plant);

double reward(const Dispatch& d_applied, double penalty_raw, double hour_price,
              double h2_price, const PlantConfig& plant, const EconomicConfig& econ,
              const EnvConfig& cfg, std::size_t horizon);

struct TraceRow {
  std::size_t t = 0;
  double soc = 0.0;  // after the step
  double p_ch = 0.0;
  double p_dh = 0.0;
  double p_awe = 0.0;
  double h2_kg = 0.0;
  double price = 0.0;
  double reward = 0.0;
  double penalty = 0.0;
};

std::string format_trace(const std::vector<TraceRow>& rows);
std::vector<TraceRow> parse_trace(std::string_view csv_text);

class Environment {
 public:
  // `forecast`, when given, replaces the curtailment the EP window observes;
  // dispatch feasibility always uses the episode's actual curtailment.
  Environment(std::shared_ptr<const EpisodeData> episode, EnvConfig cfg,
              std::optional<std::vector<double>> forecast = std::nullopt);

  Observation reset(std::uint64_t seed = 0);
  StepResult step(const Action& a);

  std::size_t t() const { return t_; }
  std::size_t horizon() const { return totals_.size(); }
  bool done() const { return t_ >= totals_.size(); }
  double soc() const { return soc_; }
  std::size_t observation_size() const { return observation_length(cfg_.window_w); }
  const EnvConfig& config() const { return cfg_; }
  const EpisodeData& episode() const { return *episode_; }
  double max_price() const { return max_price_; }
  const FixedCosts& fixed_costs() const { return fixed_; }

  // Observation for an arbitrary (t, soc) without touching episode progress.
  Observation observe(std::size_t t, double soc) const;
  // Normalized features from raw window values, shared with action mapping.
  void fill_features(Observation& obs) const;

  TraceRow trace_row(const StepResult& r) const;

 private:
  std::shared_ptr<const EpisodeData> episode_;
  EnvConfig cfg_;
  std::vector<double> totals_;
  std::vector<double> observed_;  // what the curtailment window reads
  FixedCosts fixed_;
  double max_price_ = 1.0;
  std::size_t t_ = 0;
  double soc_ = 0.0;
  bool started_ = false;
};

}  // namespace cplan
