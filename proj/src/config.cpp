#include "cplan/config.hpp"

#include <charconv>
#include <set>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cplan/errors.hpp"

namespace cplan {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

template <class Int>
Int parse_integer(const std::string& text, const std::string& what) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw FormatError("non-integer value for " + what + ": '" + text + "'");
  return value;
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw FormatError("non-boolean value for " + what + ": '" + text + "'");
}

struct Reader {
  const pt::ptree* section = nullptr;
  std::string name;
  fs::path base_dir;
  std::set<std::string> skip;
  std::set<std::string> known;

  template <class T>
  void operator()(const char* key, T& field) {
    if (skip.count(key)) return;
    known.insert(key);
    if (!section) return;
    auto child = section->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!child) return;
    std::string text = *child;
    std::string what = name + "." + key;
    if constexpr (std::is_same_v<T, double>) {
      field = parse_double(text, what);
    } else if constexpr (std::is_same_v<T, bool>) {
      field = parse_bool(text, what);
    } else if constexpr (std::is_integral_v<T>) {
      field = parse_integer<T>(text, what);
    } else if constexpr (std::is_same_v<T, fs::path>) {
      fs::path p(text);
      field = p.empty() || p.is_absolute() ? p.lexically_normal() : (base_dir / p).lexically_normal();
    } else if constexpr (std::is_same_v<T, ObservationMode>) {
      field = parse_observation_mode(text);
    } else if constexpr (std::is_same_v<T, CrfForm>) {
      field = parse_crf_form(text);
    } else if constexpr (std::is_same_v<T, UncertaintyModel>) {
      field = parse_uncertainty_model(text);
    } else {
      static_assert(!sizeof(T), "unsupported config field type");
    }
  }

  void reject_unknown() const {
    if (!section) return;
    for (const auto& [key, value] : *section)
      if (!known.count(key))
        throw ValidationError("unknown config key '" + key + "' in [" + name + "]");
  }
};

struct Writer {
  std::ostringstream* out;
  std::set<std::string> skip;

  template <class T>
  void operator()(const char* key, const T& field) {
    if (skip.count(key)) return;
    *out << key << " = ";
    if constexpr (std::is_same_v<T, double>)
      *out << format_double(field);
    else if constexpr (std::is_same_v<T, bool>)
      *out << (field ? "true" : "false");
    else if constexpr (std::is_integral_v<T>)
      *out << field;
    else if constexpr (std::is_same_v<T, fs::path>)
      *out << field.string();
    else
      *out << to_string(field);
    *out << '\n';
  }
};

struct RunFields {
  RunConfig* c;
  template <class V>
  void visit_fields(V&& v) {
    v("seed", c->seed);
    v("workers", c->workers);
  }
};

template <class Fn>
void for_each_section(RunConfig& cfg, Fn&& fn) {
  RunFields run{&cfg};
  fn("run", run, std::set<std::string>{});
  fn("data", cfg.data, std::set<std::string>{});
  fn("plant", cfg.plant, std::set<std::string>{});
  fn("economics", cfg.econ, std::set<std::string>{});
  fn("env", cfg.env, std::set<std::string>{});
  fn("train", cfg.train, std::set<std::string>{"seed", "workers"});
  fn("oracle", cfg.oracle, std::set<std::string>{});
  fn("eval", cfg.eval, std::set<std::string>{});
}

void validate_settings(const RunConfig& cfg) {
  std::vector<std::string> issues;
  for (const auto& v : validate(cfg.plant)) issues.push_back(v);
  for (const auto& v : validate(cfg.econ)) issues.push_back(v);
  for (const auto& v : validate(cfg.env)) issues.push_back(v);
  for (const auto& v : validate(cfg.train)) issues.push_back(v);
  if (cfg.workers < 1) issues.push_back("run.workers must be >= 1");
  if (!(cfg.data.hydrogen_price >= 0.0)) issues.push_back("data.hydrogen_price must be >= 0");
  if (cfg.oracle.grid_levels < 2) issues.push_back("oracle.grid_levels must be >= 2");
  if (cfg.oracle.action_levels < 2) issues.push_back("oracle.action_levels must be >= 2");
  if (!(cfg.eval.uncertainty >= 0.0 && cfg.eval.uncertainty < 1.0))
    issues.push_back("eval.uncertainty must lie in [0, 1)");
  if (cfg.eval.scenarios < 1) issues.push_back("eval.scenarios must be >= 1");
  if (cfg.eval.histogram_bins < 1) issues.push_back("eval.histogram_bins must be >= 1");
  if (cfg.eval.samples_per_cell < 1) issues.push_back("eval.samples_per_cell must be >= 1");
  if (issues.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& s : issues) msg += "\n  " + s;
  throw ValidationError(msg);
}

}  // namespace

RunConfig parse_config(std::string_view ini_text, const fs::path& base_dir) {
  pt::ptree tree;
  std::istringstream in{std::string(ini_text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw FormatError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig cfg;
  std::set<std::string> sections;
  for_each_section(cfg, [&](const std::string& name, auto& fields, std::set<std::string> skip) {
    sections.insert(name);
    auto child = tree.get_child_optional(pt::ptree::path_type(name, '\0'));
    Reader reader{child ? &*child : nullptr, name, base_dir, std::move(skip), {}};
    fields.visit_fields(reader);
    reader.reject_unknown();
  });
  for (const auto& [key, value] : tree) {
    if (!sections.count(key))
      throw ValidationError(value.empty() ? "config key '" + key + "' outside any section"
                                          : "unknown config section [" + key + "]");
  }
  cfg.train.seed = cfg.seed;
  cfg.train.workers = cfg.workers;
  validate_settings(cfg);
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  auto base = fs::absolute(path).parent_path();
  return parse_config(read_text_file(path), base);
}

std::string format_config(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::ostringstream out;
  bool first = true;
  for_each_section(copy, [&](const std::string& name, auto& fields, std::set<std::string> skip) {
    if (!first) out << '\n';
    first = false;
    out << '[' << name << "]\n";
    Writer writer{&out, std::move(skip)};
    fields.visit_fields(writer);
  });
  return out.str();
}

EpisodeData load_episode(const RunConfig& cfg) {
  EpisodeData ep;
  ep.curtailment = read_hourly_series(cfg.data.curtailment);
  ep.prices = load_prices(cfg.data.prices, ep.horizon(), cfg.data.hydrogen_price);
  ep.plant = cfg.plant;
  ep.econ = cfg.econ;
  require_valid(ep);
  return ep;
}

}  // namespace cplan
