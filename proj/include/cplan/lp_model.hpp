#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cplan/data_model.hpp"

namespace cplan {

// A linear model in the shape the CPLEX LP file format expresses.
struct LpTerm {
  double coef = 0.0;
  std::string var;
};

enum class RowSense { Le, Ge, Eq };

struct LpRow {
  std::string name;
  std::vector<LpTerm> terms;
  RowSense sense = RowSense::Le;
  double rhs = 0.0;
};

struct LpBound {
  std::string var;
  double lower = 0.0;
  double upper = 0.0;  // == lower for fixed variables
};

struct LpModel {
  std::vector<std::string> comments;
  bool maximize = true;
  std::string objective_name = "obj";
  std::vector<LpTerm> objective;
  std::vector<LpRow> rows;
  std::vector<LpBound> bounds;
  std::vector<std::string> binaries;

  // Rows whose name starts with `prefix` followed by '_'.
  std::size_t count_rows(std::string_view prefix) const;
};

std::string write_lp(const LpModel& model);
// Reads the subset of the LP format that write_lp emits.
LpModel read_lp(std::string_view text);

struct LpCheck {
  double objective = 0.0;
  double max_violation = 0.0;  // over rows, bounds and integrality
  std::string worst;           // name of the most violated item
};

// Evaluates an assignment (missing variables read as 0) against the model.
LpCheck check_assignment(const LpModel& model, const std::map<std::string, double>& values);

// Deterministic MILP of one episode: per hour t = 1..T the columns
// cf_t pch_t pdh_t pawe_t soc_t and binaries zch_t zdh_t zawe_t.
LpModel build_milp(const EpisodeData& episode);

struct Scenario {
  CurtailmentSeries curtailment;
  double probability = 0.0;
};

// Extensive form: binaries zch_t zdh_t zawe_t and discharge pdh_t shared by
// all scenarios; cf, pch, pawe and soc copied per scenario as <name>_s<i>_<t>.
LpModel build_so(const EpisodeData& episode, const std::vector<Scenario>& scenarios);

void export_milp(const EpisodeData& episode, const std::filesystem::path& path);
void export_so(const EpisodeData& episode, const std::vector<Scenario>& scenarios,
               const std::filesystem::path& path);

}  // namespace cplan
