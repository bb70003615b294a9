#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "cplan/agent.hpp"
#include "cplan/data_model.hpp"
#include "cplan/env.hpp"
#include "cplan/eval.hpp"

namespace cplan {

struct DataPaths {
  std::filesystem::path curtailment;  // hourly series CSV
  std::filesystem::path prices;       // daily TOU pattern CSV
  double hydrogen_price = 6.0;        // $/kg

  template <class Visitor>
  void visit_fields(Visitor&& v) {
    v("curtailment", curtailment);
    v("prices", prices);
    v("hydrogen_price", hydrogen_price);
  }
};

struct OracleSettings {
  int grid_levels = 101;
  int action_levels = 21;
  double max_evaluations = 5e9;

  template <class Visitor>
  void visit_fields(Visitor&& v) {
    v("grid_levels", grid_levels);
    v("action_levels", action_levels);
    v("max_evaluations", max_evaluations);
  }
};

struct EvalSettings {
  double uncertainty = 0.1;
  int scenarios = 200;
  UncertaintyModel model = UncertaintyModel::UniformHourly;
  int histogram_bins = 50;
  int samples_per_cell = 2000;

  template <class Visitor>
  void visit_fields(Visitor&& v) {
    v("uncertainty", uncertainty);
    v("scenarios", scenarios);
    v("model", model);
    v("histogram_bins", histogram_bins);
    v("samples_per_cell", samples_per_cell);
  }
};

// INI sections: [run] seed, workers; [data]; [plant]; [economics]; [env];
// [train]; [oracle]; [eval]. Keys equal the struct field names; unknown
// sections or keys are rejected. [run] seed and workers feed TrainConfig.
struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  DataPaths data;
  PlantConfig plant;
  EconomicConfig econ;
  EnvConfig env;
  TrainConfig train;
  OracleSettings oracle;
  EvalSettings eval;
};

// Relative data paths resolve against `base_dir`.
RunConfig parse_config(std::string_view ini_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

// Canonical INI text with every key and absolute data paths; parses back to
// an equal RunConfig.
std::string format_config(const RunConfig& cfg);

// Assembles and validates the configured episode.
EpisodeData load_episode(const RunConfig& cfg);

}  // namespace cplan
