#pragma once

#include <span>

#include "cplan/data_model.hpp"

namespace cplan {

struct BessState {
  double soc_fraction = 0.0;
};

// Energies for one hour, all in MWh.
struct Dispatch {
  double p_charge = 0.0;
  double p_discharge = 0.0;
  double p_awe = 0.0;

  bool operator==(const Dispatch&) const = default;
};

struct HourRecord {
  Dispatch dispatch;
  double soc_after = 0.0;
  double hydrogen_kg = 0.0;
  double revenue = 0.0;
  double vom_cost = 0.0;
};

struct HourEconomics {
  double revenue = 0.0;
  double vom = 0.0;
};

struct FixedCosts {
  double c_acc = 0.0;  // annualized capital cost, $/yr
  double c_fo = 0.0;   // fixed O&M, $/yr
  double total() const { return c_acc + c_fo; }
};

// Slack allowed on the SOC bounds to absorb floating-point rounding.
inline constexpr double kSocTolerance = 1e-9;

double bess_power_limit(const PlantConfig& plant);

// SOC after applying one hour of dispatch. Throws BoundsError if the result
// leaves [soc_min_fraction, 1] by more than kSocTolerance.
BessState step_soc(BessState state, const Dispatch& d, const PlantConfig& plant);

double hydrogen_out(double p_awe, const PlantConfig& plant);

HourEconomics hour_economics(const Dispatch& d, double hour_price, double h2_price,
                             const EconomicConfig& econ, const PlantConfig& plant);

double capital_recovery_factor(double rate, int years, CrfForm form = CrfForm::SinkingFund);

FixedCosts annualized_fixed_costs(const PlantConfig& plant, const EconomicConfig& econ);

// Net profit over the horizon: revenue minus variable and fixed costs.
double objective(std::span<const HourRecord> records, const PlantConfig& plant,
                 const EconomicConfig& econ);

// Builds the full record for a dispatch applied at hour t of an episode.
HourRecord make_record(const EpisodeData& episode, std::size_t t, BessState before,
                       const Dispatch& d);

// Replays a dispatch sequence from the initial SOC. Throws on any bound error.
std::vector<HourRecord> replay(const EpisodeData& episode, std::span<const Dispatch> plan);

}  // namespace cplan
