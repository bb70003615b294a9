#pragma once

#include <cstdint>
#include <vector>

#include "cplan/data_model.hpp"
#include "cplan/plant.hpp"

namespace cplan {

// K evenly spaced SOC fractions from soc_min_fraction to 1, endpoints exact.
struct SocGrid {
  std::vector<double> values;

  static SocGrid uniform(double soc_min, int levels);
  int levels() const { return static_cast<int>(values.size()); }
  // Index of the grid level equal to soc (within 1e-12), or -1.
  int index_of(double soc) const;
};

struct PlanResult {
  std::vector<Dispatch> dispatch_sequence;
  std::vector<double> soc_path;  // T + 1 entries, starting at the initial SOC
  double profit = 0.0;           // objective() of the replayed plan
};

// Discretization shared by dp_solve and brute_force. Battery moves are the
// transitions between grid levels reachable within the power limit, so every
// planned SOC lands exactly on the lattice; electrolyzer power takes
// `action_levels` evenly spaced fractions of awe_power_max in [0, 1], with
// levels under the minimum-load fraction collapsed to "off".
struct Discretization {
  SocGrid grid;
  int action_levels = 5;
};

std::vector<double> awe_levels(const PlantConfig& plant, int action_levels);

struct DpOptions {
  double max_evaluations = 5e9;  // T * K * moves * awe levels
};

PlanResult dp_solve(const EpisodeData& episode, const Discretization& disc,
                    DpOptions options = {});

// Exhaustive enumeration of every discretized dispatch sequence. T <= 5.
PlanResult brute_force(const EpisodeData& episode, const Discretization& disc);

// Upper bound on profit ignoring exclusivity, the electrolyzer dead-band and
// the hour-by-hour SOC coupling; every delivered MWh gets its best value.
double relaxation_upper_bound(const EpisodeData& episode);

std::string format_plan(const EpisodeData& episode, const PlanResult& plan);

}  // namespace cplan
