#pragma once

#include <random>

#include "cplan/data_model.hpp"

namespace cplan::testing {

inline EconomicConfig zero_costs() {
  EconomicConfig e;
  e.capex_bess = e.capex_awe = 0.0;
  e.vom_bess = e.vom_awe = 0.0;
  e.fo_bess_rate = e.fo_awe_fraction = 0.0;
  return e;
}

inline CurtailmentSeries flat_series(std::size_t T, double wind, double solar) {
  CurtailmentSeries s;
  s.start_timestamp = parse_iso8601("2021-01-01T00:00Z");
  s.wind.assign(T, wind);
  s.solar.assign(T, solar);
  return s;
}

// Random episode with default plant physics. soc_initial is drawn from the
// K = 11 grid so the instance is also valid for the oracles.
inline EpisodeData random_episode(std::mt19937_64& rng, std::size_t T) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  EpisodeData ep;
  ep.curtailment = flat_series(T, 0.0, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    ep.curtailment.wind[t] = 300.0 * u(rng);
    ep.curtailment.solar[t] = u(rng) < 0.3 ? 0.0 : 900.0 * u(rng);
    ep.prices.electricity.push_back(50.0 + 350.0 * u(rng));
  }
  ep.prices.hydrogen = 6.0;
  int level = std::uniform_int_distribution<int>(0, 10)(rng);
  ep.plant.soc_initial_fraction = 0.1 + 0.9 * (level / 10.0);
  ep.econ.capex_bess = 2e5 * u(rng);
  ep.econ.capex_awe = 1e3 * u(rng);
  ep.econ.fo_bess_rate = 50.0 * u(rng);
  return ep;
}

}  // namespace cplan::testing

namespace cplan::testing {

// Fixed 24-hour instance behind the golden LP file.
inline EpisodeData golden_episode() {
  EpisodeData ep;
  ep.curtailment = flat_series(24, 0.0, 0.0);
  const double tou[24] = {250, 250, 250, 250, 250, 250, 250, 250, 160, 160, 160, 160,
                          160, 160, 160, 160, 390, 390, 390, 390, 390, 250, 250, 250};
  for (std::size_t t = 0; t < 24; ++t) {
    ep.curtailment.wind[t] = 40.0 + 10.0 * static_cast<double>(t % 5);
    if (t >= 8 && t <= 16) ep.curtailment.solar[t] = 150.0 * static_cast<double>(9 - (t > 12 ? t - 12 : 12 - t)) - 600.0;
    ep.prices.electricity.push_back(tou[t]);
  }
  return ep;
}

}  // namespace cplan::testing
