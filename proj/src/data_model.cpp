#include "cplan/data_model.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cplan/errors.hpp"

namespace cplan {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

// Non-empty lines, with line numbers (1-based) for error messages.
std::vector<std::pair<std::size_t, std::string_view>> lines_of(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find('\n', start);
    auto line = text.substr(start, pos == std::string_view::npos ? text.size() - start
                                                                 : pos - start);
    ++lineno;
    if (!trim(line).empty()) out.emplace_back(lineno, trim(line));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw FormatError("malformed integer in " + std::string(what) + ": '" +
                      std::string(text) + "'");
  return value;
}

void expect_header(const std::vector<std::pair<std::size_t, std::string_view>>& lines,
                   std::string_view header, std::string_view what) {
  if (lines.empty()) throw FormatError(std::string(what) + ": empty input");
  if (lines.front().second != header)
    throw FormatError(std::string(what) + ": expected header '" + std::string(header) +
                      "', got '" + std::string(lines.front().second) + "'");
}

template <class Fn>
void check_each(const std::vector<double>& v, Fn&& fn) {
  for (std::size_t i = 0; i < v.size(); ++i) fn(i, v[i]);
}

}  // namespace

EpochMinutes parse_iso8601(std::string_view text) {
  text = trim(text);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  auto bad = [&] {
    return FormatError("malformed ISO-8601 timestamp '" + std::string(text) + "'");
  };
  if (text.size() < 16 || text[4] != '-' || text[7] != '-' ||
      (text[10] != 'T' && text[10] != ' ') || text[13] != ':')
    throw bad();
  try {
    y = parse_int(text.substr(0, 4), "year");
    mo = parse_int(text.substr(5, 2), "month");
    d = parse_int(text.substr(8, 2), "day");
    h = parse_int(text.substr(11, 2), "hour");
    mi = parse_int(text.substr(14, 2), "minute");
  } catch (const FormatError&) {
    throw bad();
  }
  std::string_view rest = text.substr(16);
  if (!rest.empty() && rest.front() == ':') {
    if (rest.size() < 3) throw bad();
    try {
      s = parse_int(rest.substr(1, 2), "second");
    } catch (const FormatError&) {
      throw bad();
    }
    rest.remove_prefix(3);
  }
  int offset_minutes = 0;
  if (rest == "Z" || rest.empty()) {
  } else if ((rest.front() == '+' || rest.front() == '-') && rest.size() == 6 &&
             rest[3] == ':') {
    int oh = 0, om = 0;
    try {
      oh = parse_int(rest.substr(1, 2), "offset");
      om = parse_int(rest.substr(4, 2), "offset");
    } catch (const FormatError&) {
      throw bad();
    }
    offset_minutes = (rest.front() == '+' ? 1 : -1) * (oh * 60 + om);
  } else {
    throw bad();
  }
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) throw bad();
  if (s != 0)
    throw FormatError("timestamp '" + std::string(text) + "' is not on the 15-minute grid");
  auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<EpochMinutes>(days) * 1440 + h * 60 + mi - offset_minutes;
}

std::string format_iso8601(EpochMinutes minutes) {
  using namespace std::chrono;
  auto day_count = minutes >= 0 ? minutes / 1440 : (minutes - 1439) / 1440;
  auto in_day = minutes - day_count * 1440;
  year_month_day ymd{sys_days{days{day_count}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:00Z", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), int(in_day / 60),
                int(in_day % 60));
  return buf;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw FormatError("non-numeric value for " + std::string(what) + ": '" +
                      std::string(text) + "'");
  return value;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<double> CurtailmentSeries::totals() const {
  std::vector<double> out(size());
  for (std::size_t t = 0; t < size(); ++t) out[t] = total(t);
  return out;
}

std::string to_string(CrfForm form) {
  return form == CrfForm::SinkingFund ? "sinking_fund" : "annuity";
}

CrfForm parse_crf_form(std::string_view text) {
  if (text == "sinking_fund") return CrfForm::SinkingFund;
  if (text == "annuity") return CrfForm::Annuity;
  throw ValidationError("crf_form must be 'sinking_fund' or 'annuity', got '" +
                        std::string(text) + "'");
}

CurtailmentSeries ingest_curtailment(std::span<const QuarterRecord> records) {
  if (records.empty()) throw FormatError("curtailment input has no records");
  constexpr EpochMinutes kQuarter = 15;
  const auto& first = records.front();
  if (first.timestamp % 60 != 0)
    throw FormatError("first record " + format_iso8601(first.timestamp) +
                      " does not start an hour");
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].timestamp <= records[i - 1].timestamp)
      throw FormatError("records out of order or duplicated at " +
                        format_iso8601(records[i].timestamp));
  CurtailmentSeries out;
  out.start_timestamp = first.timestamp;
  out.wind.reserve(records.size() / 4);
  out.solar.reserve(records.size() / 4);
  EpochMinutes expected = first.timestamp;
  double wind = 0.0, solar = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.timestamp % kQuarter != 0)
      throw FormatError("timestamp " + format_iso8601(r.timestamp - r.timestamp % kQuarter) +
                        " (+" + std::to_string(r.timestamp % kQuarter) +
                        " min) is not on the 15-minute grid");
    if (r.timestamp > expected) {
      auto hour = expected - expected % 60;
      throw GapError("missing quarter-hour record at " + format_iso8601(expected) +
                         " in hour " + format_iso8601(hour),
                     format_iso8601(hour));
    }
    if (!(r.wind >= 0.0) || !(r.solar >= 0.0) || !std::isfinite(r.wind) ||
        !std::isfinite(r.solar))
      throw ValidationError("negative or non-finite curtailment at " +
                            format_iso8601(r.timestamp));
    wind += r.wind;
    solar += r.solar;
    expected += kQuarter;
    if (expected % 60 == 0) {
      out.wind.push_back(wind);
      out.solar.push_back(solar);
      wind = solar = 0.0;
    }
  }
  if (expected % 60 != 0) {
    auto hour = expected - expected % 60;
    throw GapError("hour " + format_iso8601(hour) + " has fewer than 4 quarter records",
                   format_iso8601(hour));
  }
  return out;
}

std::vector<QuarterRecord> parse_quarter_records(std::string_view csv_text) {
  auto lines = lines_of(csv_text);
  expect_header(lines, "timestamp,wind_mwh,solar_mwh", "curtailment input");
  std::vector<QuarterRecord> out;
  out.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = split(lines[i].second, ',');
    if (fields.size() != 3)
      throw FormatError("curtailment input line " + std::to_string(lines[i].first) +
                        ": expected 3 fields");
    QuarterRecord r;
    r.timestamp = parse_iso8601(fields[0]);
    r.wind = parse_double(fields[1], "wind_mwh");
    r.solar = parse_double(fields[2], "solar_mwh");
    out.push_back(r);
  }
  return out;
}

std::vector<QuarterRecord> read_quarter_records(const std::filesystem::path& path) {
  return parse_quarter_records(read_text_file(path));
}

CurtailmentSeries parse_hourly_series(std::string_view csv_text) {
  auto lines = lines_of(csv_text);
  expect_header(lines, "timestamp,wind_mwh,solar_mwh", "hourly series");
  CurtailmentSeries out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = split(lines[i].second, ',');
    if (fields.size() != 3)
      throw FormatError("hourly series line " + std::to_string(lines[i].first) +
                        ": expected 3 fields");
    auto ts = parse_iso8601(fields[0]);
    if (i == 1) {
      if (ts % 60 != 0) throw FormatError("hourly series must start on an hour");
      out.start_timestamp = ts;
    } else if (ts != out.start_timestamp + 60 * static_cast<EpochMinutes>(i - 1)) {
      throw FormatError("hourly series line " + std::to_string(lines[i].first) +
                        ": timestamp not consecutive");
    }
    out.wind.push_back(parse_double(fields[1], "wind_mwh"));
    out.solar.push_back(parse_double(fields[2], "solar_mwh"));
  }
  if (out.size() == 0) throw FormatError("hourly series has no rows");
  auto problems = validate(out);
  if (!problems.empty()) throw ValidationError(problems.front());
  return out;
}

CurtailmentSeries read_hourly_series(const std::filesystem::path& path) {
  return parse_hourly_series(read_text_file(path));
}

std::string format_hourly_series(const CurtailmentSeries& series) {
  std::string out = "timestamp,wind_mwh,solar_mwh\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    out += format_iso8601(series.start_timestamp + 60 * static_cast<EpochMinutes>(t));
    out += ',';
    out += format_double(series.wind[t]);
    out += ',';
    out += format_double(series.solar[t]);
    out += '\n';
  }
  return out;
}

PriceSchedule parse_prices(std::string_view csv_text, std::size_t horizon,
                           double hydrogen_price) {
  auto lines = lines_of(csv_text);
  expect_header(lines, "hour,price_usd_per_mwh", "price file");
  std::vector<double> pattern;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = split(lines[i].second, ',');
    if (fields.size() != 2)
      throw FormatError("price file line " + std::to_string(lines[i].first) +
                        ": expected 2 fields");
    if (parse_int(fields[0], "hour") != static_cast<int>(i - 1))
      throw FormatError("price file line " + std::to_string(lines[i].first) +
                        ": hours must count up from 0");
    double p = parse_double(fields[1], "price_usd_per_mwh");
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ValidationError("price file line " + std::to_string(lines[i].first) +
                            ": negative price");
    pattern.push_back(p);
  }
  if (pattern.size() < 24)
    throw FormatError("price file must contain at least one full 24-hour day, got " +
                      std::to_string(pattern.size()) + " rows");
  PriceSchedule out;
  out.hydrogen = hydrogen_price;
  out.electricity.resize(horizon);
  for (std::size_t t = 0; t < horizon; ++t) out.electricity[t] = pattern[t % pattern.size()];
  return out;
}

PriceSchedule load_prices(const std::filesystem::path& path, std::size_t horizon,
                          double hydrogen_price) {
  return parse_prices(read_text_file(path), horizon, hydrogen_price);
}

std::vector<std::string> validate(const PlantConfig& p) {
  std::vector<std::string> v;
  auto need = [&](bool ok, const char* msg) {
    if (!ok) v.emplace_back(msg);
  };
  need(p.bess_capacity > 0.0, "bess_capacity must be > 0");
  need(p.soc_min_fraction > 0.0 && p.soc_min_fraction < 1.0,
       "soc_min_fraction must lie in (0, 1)");
  need(p.soc_initial_fraction >= p.soc_min_fraction && p.soc_initial_fraction <= 1.0,
       "soc_initial_fraction must lie in [soc_min_fraction, 1]");
  need(p.eta_charge > 0.0 && p.eta_charge <= 1.0, "eta_charge must lie in (0, 1]");
  need(p.eta_discharge > 0.0 && p.eta_discharge <= 1.0, "eta_discharge must lie in (0, 1]");
  need(p.eta_awe > 0.0 && p.eta_awe <= 1.0, "eta_awe must lie in (0, 1]");
  need(p.bess_power_fraction > 0.0 && p.bess_power_fraction <= 1.0,
       "bess_power_fraction must lie in (0, 1]");
  need(p.awe_min_fraction >= 0.0 && p.awe_min_fraction < 1.0,
       "awe_min_fraction must lie in [0, 1)");
  need(p.awe_power_max >= 0.0, "awe_power_max must be >= 0");
  need(p.lhv > 0.0, "lhv must be > 0");
  return v;
}

std::vector<std::string> validate(const EconomicConfig& e) {
  std::vector<std::string> v;
  auto need = [&](bool ok, const char* msg) {
    if (!ok) v.emplace_back(msg);
  };
  need(e.inflation_rate > 0.0, "inflation_rate must be > 0");
  need(e.lifetime_years >= 1, "lifetime_years must be >= 1");
  need(e.capex_bess >= 0.0, "capex_bess must be >= 0");
  need(e.capex_awe >= 0.0, "capex_awe must be >= 0");
  need(e.vom_bess >= 0.0, "vom_bess must be >= 0");
  need(e.vom_awe >= 0.0, "vom_awe must be >= 0");
  need(e.fo_bess_rate >= 0.0, "fo_bess_rate must be >= 0");
  need(e.fo_awe_fraction >= 0.0, "fo_awe_fraction must be >= 0");
  return v;
}

std::vector<std::string> validate(const CurtailmentSeries& s) {
  std::vector<std::string> v;
  if (s.wind.size() != s.solar.size())
    v.push_back("curtailment length mismatch: wind has " + std::to_string(s.wind.size()) +
                " entries, solar has " + std::to_string(s.solar.size()));
  if (s.wind.empty() && s.solar.empty()) v.emplace_back("curtailment series is empty");
  auto nonneg = [&](const char* name) {
    return [&v, name](std::size_t i, double x) {
      if (!(x >= 0.0) || !std::isfinite(x))
        v.push_back(std::string(name) + "[" + std::to_string(i) +
                    "] must be finite and >= 0");
    };
  };
  check_each(s.wind, nonneg("wind"));
  check_each(s.solar, nonneg("solar"));
  if (s.start_timestamp % 60 != 0) v.emplace_back("start_timestamp must be on an hour");
  return v;
}

std::vector<std::string> validate(const PriceSchedule& p) {
  std::vector<std::string> v;
  check_each(p.electricity, [&](std::size_t i, double x) {
    if (!(x >= 0.0) || !std::isfinite(x))
      v.push_back("electricity price[" + std::to_string(i) + "] must be finite and >= 0");
  });
  if (!(p.hydrogen >= 0.0) || !std::isfinite(p.hydrogen))
    v.emplace_back("hydrogen price must be finite and >= 0");
  return v;
}

std::vector<std::string> validate(const EpisodeData& e) {
  std::vector<std::string> v;
  auto append = [&](std::vector<std::string> more) {
    v.insert(v.end(), more.begin(), more.end());
  };
  append(validate(e.curtailment));
  append(validate(e.prices));
  append(validate(e.plant));
  append(validate(e.econ));
  if (e.prices.electricity.size() != e.curtailment.wind.size())
    v.push_back("price length " + std::to_string(e.prices.electricity.size()) +
                " does not match curtailment length " +
                std::to_string(e.curtailment.wind.size()));
  return v;
}

void require_valid(const EpisodeData& episode) {
  auto problems = validate(episode);
  if (problems.empty()) return;
  std::string msg = "invalid episode:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw ValidationError(msg);
}

namespace {

struct JsonWriter {
  nlohmann::json& j;
  template <class T>
  void operator()(const char* name, T& value) {
    if constexpr (std::is_same_v<T, CrfForm>)
      j[name] = to_string(value);
    else
      j[name] = value;
  }
};

struct JsonReader {
  const nlohmann::json& j;
  template <class T>
  void operator()(const char* name, T& value) {
    if (!j.contains(name)) throw FormatError(std::string("missing field '") + name + "'");
    if constexpr (std::is_same_v<T, CrfForm>)
      value = parse_crf_form(j.at(name).get<std::string>());
    else
      value = j.at(name).get<T>();
  }
};

}  // namespace

nlohmann::json to_json(const EpisodeData& episode) {
  nlohmann::json j;
  j["curtailment"] = {{"start_timestamp", format_iso8601(episode.curtailment.start_timestamp)},
                      {"wind", episode.curtailment.wind},
                      {"solar", episode.curtailment.solar}};
  j["prices"] = {{"electricity", episode.prices.electricity},
                 {"hydrogen", episode.prices.hydrogen}};
  auto plant = episode.plant;
  auto econ = episode.econ;
  plant.visit_fields(JsonWriter{j["plant"]});
  econ.visit_fields(JsonWriter{j["econ"]});
  return j;
}

EpisodeData episode_from_json(const nlohmann::json& j) {
  try {
    EpisodeData e;
    const auto& c = j.at("curtailment");
    e.curtailment.start_timestamp = parse_iso8601(c.at("start_timestamp").get<std::string>());
    e.curtailment.wind = c.at("wind").get<std::vector<double>>();
    e.curtailment.solar = c.at("solar").get<std::vector<double>>();
    e.prices.electricity = j.at("prices").at("electricity").get<std::vector<double>>();
    e.prices.hydrogen = j.at("prices").at("hydrogen").get<double>();
    e.plant.visit_fields(JsonReader{j.at("plant")});
    e.econ.visit_fields(JsonReader{j.at("econ")});
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("malformed episode document: ") + ex.what());
  }
}

}  // namespace cplan
