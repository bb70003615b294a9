#include "cplan/plant.hpp"

#include <cmath>

#include "cplan/errors.hpp"

namespace cplan {

double bess_power_limit(const PlantConfig& plant) {
  return plant.bess_power_fraction * plant.bess_capacity;
}

BessState step_soc(BessState state, const Dispatch& d, const PlantConfig& plant) {
  double next = state.soc_fraction +
                (d.p_charge * plant.eta_charge - d.p_discharge / plant.eta_discharge) /
                    plant.bess_capacity;
  if (next > 1.0 + kSocTolerance)
    throw BoundsError("SOC would exceed 1 by " + format_double(next - 1.0), next - 1.0);
  if (next < plant.soc_min_fraction - kSocTolerance)
    throw BoundsError("SOC would fall below soc_min_fraction by " +
                          format_double(plant.soc_min_fraction - next),
                      next - plant.soc_min_fraction);
  if (next > 1.0) next = 1.0;
  if (next < plant.soc_min_fraction) next = plant.soc_min_fraction;
  return BessState{next};
}

double hydrogen_out(double p_awe, const PlantConfig& plant) {
  return p_awe * plant.eta_awe / plant.lhv;
}

HourEconomics hour_economics(const Dispatch& d, double hour_price, double h2_price,
                             const EconomicConfig& econ, const PlantConfig& plant) {
  double h2 = hydrogen_out(d.p_awe, plant);
  return {d.p_discharge * hour_price + h2 * h2_price,
          d.p_discharge * econ.vom_bess + h2 * econ.vom_awe};
}

double capital_recovery_factor(double rate, int years, CrfForm form) {
  double growth = std::pow(1.0 + rate, years);
  if (form == CrfForm::Annuity) return rate * growth / (growth - 1.0);
  return rate / (growth - 1.0);
}

FixedCosts annualized_fixed_costs(const PlantConfig& plant, const EconomicConfig& econ) {
  double crf = capital_recovery_factor(econ.inflation_rate, econ.lifetime_years, econ.crf_form);
  FixedCosts out;
  out.c_acc = (econ.capex_bess + econ.capex_awe) * crf;
  // The electrolyzer term multiplies rated power by capex, as in the source model.
  out.c_fo = plant.bess_capacity * econ.fo_bess_rate +
             econ.fo_awe_fraction * plant.awe_power_max * econ.capex_awe;
  return out;
}

double objective(std::span<const HourRecord> records, const PlantConfig& plant,
                 const EconomicConfig& econ) {
  if (records.empty()) throw ValidationError("objective needs at least one hour record");
  double revenue = 0.0, vom = 0.0;
  for (const auto& r : records) {
    revenue += r.revenue;
    vom += r.vom_cost;
  }
  auto fixed = annualized_fixed_costs(plant, econ);
  return revenue - vom - fixed.c_fo - fixed.c_acc;
}

HourRecord make_record(const EpisodeData& episode, std::size_t t, BessState before,
                       const Dispatch& d) {
  HourRecord r;
  r.dispatch = d;
  r.soc_after = step_soc(before, d, episode.plant).soc_fraction;
  r.hydrogen_kg = hydrogen_out(d.p_awe, episode.plant);
  auto econ = hour_economics(d, episode.prices.electricity[t], episode.prices.hydrogen,
                             episode.econ, episode.plant);
  r.revenue = econ.revenue;
  r.vom_cost = econ.vom;
  return r;
}

std::vector<HourRecord> replay(const EpisodeData& episode, std::span<const Dispatch> plan) {
  std::vector<HourRecord> out;
  out.reserve(plan.size());
  BessState soc{episode.plant.soc_initial_fraction};
  for (std::size_t t = 0; t < plan.size(); ++t) {
    out.push_back(make_record(episode, t, soc, plan[t]));
    soc.soc_fraction = out.back().soc_after;
  }
  return out;
}

}  // namespace cplan
