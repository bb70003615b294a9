#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cplan {

// Calendar time is carried as minutes since 1970-01-01T00:00Z.
using EpochMinutes = std::int64_t;

EpochMinutes parse_iso8601(std::string_view text);
std::string format_iso8601(EpochMinutes minutes);

struct CurtailmentSeries {
  EpochMinutes start_timestamp = 0;  // always on an hour boundary
  std::vector<double> wind;          // MWh per hour
  std::vector<double> solar;         // MWh per hour

  std::size_t size() const { return wind.size(); }
  double total(std::size_t t) const { return wind[t] + solar[t]; }
  std::vector<double> totals() const;

  bool operator==(const CurtailmentSeries&) const = default;
};

struct PriceSchedule {
  std::vector<double> electricity;  // $/MWh, one entry per hour
  double hydrogen = 6.0;            // $/kg, constant over the horizon

  bool operator==(const PriceSchedule&) const = default;
};

struct PlantConfig {
  double bess_capacity = 1500.0;       // MWh
  double bess_power_fraction = 0.30;   // power limit = fraction * capacity
  double soc_min_fraction = 0.10;      // alpha
  double eta_charge = 0.95;
  double eta_discharge = 0.95;
  double awe_power_max = 500.0;        // MWh/h
  double awe_min_fraction = 0.20;      // beta
  double eta_awe = 0.70;
  double lhv = 0.03333;                // MWh/kg
  double soc_initial_fraction = 0.10;

  bool operator==(const PlantConfig&) const = default;

  template <class Visitor>
  void visit_fields(Visitor&& v) {
    v("bess_capacity", bess_capacity);
    v("bess_power_fraction", bess_power_fraction);
    v("soc_min_fraction", soc_min_fraction);
    v("eta_charge", eta_charge);
    v("eta_discharge", eta_discharge);
    v("awe_power_max", awe_power_max);
    v("awe_min_fraction", awe_min_fraction);
    v("eta_awe", eta_awe);
    v("lhv", lhv);
    v("soc_initial_fraction", soc_initial_fraction);
  }
};

enum class CrfForm { SinkingFund, Annuity };

struct EconomicConfig {
  double capex_bess = 2.0e8;     // $
  double capex_awe = 2.0e5;      // $
  double inflation_rate = 0.08;  // r
  int lifetime_years = 10;       // n
  double vom_bess = 2.0;         // $/MWh discharged
  double vom_awe = 0.5;          // $/kg H2
  double fo_bess_rate = 2000.0;  // $/(MWh capacity * yr)
  double fo_awe_fraction = 0.05;
  CrfForm crf_form = CrfForm::SinkingFund;

  bool operator==(const EconomicConfig&) const = default;

  template <class Visitor>
  void visit_fields(Visitor&& v) {
    v("capex_bess", capex_bess);
    v("capex_awe", capex_awe);
    v("inflation_rate", inflation_rate);
    v("lifetime_years", lifetime_years);
    v("vom_bess", vom_bess);
    v("vom_awe", vom_awe);
    v("fo_bess_rate", fo_bess_rate);
    v("fo_awe_fraction", fo_awe_fraction);
    v("crf_form", crf_form);
  }
};

std::string to_string(CrfForm form);
CrfForm parse_crf_form(std::string_view text);

struct EpisodeData {
  CurtailmentSeries curtailment;
  PriceSchedule prices;
  PlantConfig plant;
  EconomicConfig econ;

  std::size_t horizon() const { return curtailment.size(); }
  bool operator==(const EpisodeData&) const = default;
};

// One quarter-hour reading from the raw curtailment feed (energies in MWh).
struct QuarterRecord {
  EpochMinutes timestamp = 0;
  double wind = 0.0;
  double solar = 0.0;
};

// Sums each aligned block of four quarter-hour readings into one hour.
CurtailmentSeries ingest_curtailment(std::span<const QuarterRecord> records);

// CSV with header `timestamp,wind_mwh,solar_mwh`.
std::vector<QuarterRecord> read_quarter_records(const std::filesystem::path& path);
std::vector<QuarterRecord> parse_quarter_records(std::string_view csv_text);
CurtailmentSeries read_hourly_series(const std::filesystem::path& path);
CurtailmentSeries parse_hourly_series(std::string_view csv_text);
std::string format_hourly_series(const CurtailmentSeries& series);

// CSV with header `hour,price_usd_per_mwh`. The daily pattern is tiled or
// truncated to `horizon` entries.
PriceSchedule load_prices(const std::filesystem::path& path, std::size_t horizon,
                          double hydrogen_price);
PriceSchedule parse_prices(std::string_view csv_text, std::size_t horizon,
                           double hydrogen_price);

std::vector<std::string> validate(const PlantConfig& plant);
std::vector<std::string> validate(const EconomicConfig& econ);
std::vector<std::string> validate(const CurtailmentSeries& series);
std::vector<std::string> validate(const PriceSchedule& prices);
// Every violated invariant of the members; empty iff the episode is valid.
std::vector<std::string> validate(const EpisodeData& episode);
// Throws ValidationError listing all violations.
void require_valid(const EpisodeData& episode);

nlohmann::json to_json(const EpisodeData& episode);
EpisodeData episode_from_json(const nlohmann::json& j);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view what);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace cplan
