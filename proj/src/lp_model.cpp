#include "cplan/lp_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "cplan/errors.hpp"
#include "cplan/plant.hpp"

namespace cplan {

std::size_t LpModel::count_rows(std::string_view prefix) const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [&](const LpRow& r) {
    return r.name.size() > prefix.size() && r.name.compare(0, prefix.size(), prefix) == 0 &&
           r.name[prefix.size()] == '_';
  }));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void append_term(std::string& out, const LpTerm& term) {
  out += term.coef < 0.0 ? " - " : " + ";
  double mag = std::abs(term.coef);
  if (mag != 1.0) {
    out += format_double(mag);
    out += ' ';
  }
  out += term.var;
}

const char* sense_text(RowSense s) {
  switch (s) {
    case RowSense::Le: return "<=";
    case RowSense::Ge: return ">=";
    case RowSense::Eq: return "=";
  }
  return "=";
}

}  // namespace

std::string write_lp(const LpModel& m) {
  std::string out;
  for (const auto& c : m.comments) out += "\\ " + c + "\n";
  out += m.maximize ? "Maximize\n" : "Minimize\n";
  out += " " + m.objective_name + ":";
  // Four terms per line keeps every line well under the format's length limit.
  for (std::size_t i = 0; i < m.objective.size(); ++i) {
    if (i > 0 && i % 4 == 0) out += "\n   ";
    append_term(out, m.objective[i]);
  }
  out += "\nSubject To\n";
  for (const auto& r : m.rows) {
    out += " " + r.name + ":";
    for (const auto& t : r.terms) append_term(out, t);
    out += ' ';
    out += sense_text(r.sense);
    out += ' ';
    out += format_double(r.rhs);
    out += '\n';
  }
  out += "Bounds\n";
  for (const auto& b : m.bounds) {
    if (b.lower == b.upper)
      out += " " + b.var + " = " + format_double(b.lower) + "\n";
    else
      out += " " + format_double(b.lower) + " <= " + b.var + " <= " + format_double(b.upper) +
             "\n";
  }
  if (!m.binaries.empty()) {
    out += "Binaries\n";
    for (std::size_t i = 0; i < m.binaries.size(); ++i) {
      out += ' ';
      out += m.binaries[i];
      if (i % 3 == 2 || i + 1 == m.binaries.size()) out += '\n';
    }
  }
  out += "End\n";
  return out;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

enum class Section { None, Objective, Rows, Bounds, Binaries, End };

Section section_of(const std::string& line_lower) {
  if (line_lower == "maximize" || line_lower == "maximum" || line_lower == "max" ||
      line_lower == "minimize" || line_lower == "minimum" || line_lower == "min")
    return Section::Objective;
  if (line_lower == "subject to" || line_lower == "st" || line_lower == "s.t." ||
      line_lower == "such that")
    return Section::Rows;
  if (line_lower == "bounds" || line_lower == "bound") return Section::Bounds;
  if (line_lower == "binaries" || line_lower == "binary" || line_lower == "bin")
    return Section::Binaries;
  if (line_lower == "end") return Section::End;
  return Section::None;
}

bool is_number(const std::string& tok) {
  if (tok.empty()) return false;
  char c = tok[0];
  return std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
         ((c == '-' || c == '+') && tok.size() > 1 &&
          (std::isdigit(static_cast<unsigned char>(tok[1])) || tok[1] == '.')) ||
         lower(tok) == "inf" || lower(tok) == "infinity" || lower(tok) == "-inf" ||
         lower(tok) == "+inf";
}

double number_of(const std::string& tok) {
  auto l = lower(tok);
  if (l == "inf" || l == "infinity" || l == "+inf") return kInf;
  if (l == "-inf") return -kInf;
  return parse_double(tok, "LP number");
}

bool is_sense(const std::string& tok) {
  return tok == "<=" || tok == ">=" || tok == "=" || tok == "<" || tok == ">" || tok == "=<" ||
         tok == "=>";
}

RowSense sense_of(const std::string& tok) {
  if (tok == "<=" || tok == "<" || tok == "=<") return RowSense::Le;
  if (tok == ">=" || tok == ">" || tok == "=>") return RowSense::Ge;
  return RowSense::Eq;
}

// Parses `[+|-] [coef] var` sequences from tokens[i..] until a stop token.
std::vector<LpTerm> parse_terms(const std::vector<std::string>& toks, std::size_t& i,
                                bool stop_at_sense) {
  std::vector<LpTerm> terms;
  while (i < toks.size()) {
    if (stop_at_sense && is_sense(toks[i])) break;
    double sign = 1.0;
    while (i < toks.size() && (toks[i] == "+" || toks[i] == "-")) {
      if (toks[i] == "-") sign = -sign;
      ++i;
    }
    if (i >= toks.size()) throw FormatError("LP: dangling sign");
    double coef = 1.0;
    if (is_number(toks[i])) {
      coef = number_of(toks[i]);
      ++i;
      if (i >= toks.size() || is_sense(toks[i]))
        throw FormatError("LP: constant terms are not supported");
    }
    terms.push_back({sign * coef, toks[i]});
    ++i;
  }
  return terms;
}

std::vector<std::string> tokens_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(text)};
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

LpModel read_lp(std::string_view text) {
  LpModel m;
  m.objective_name.clear();
  Section section = Section::None;
  std::vector<std::string> objective_tokens, row_tokens;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto comment = line.find('\\');
    if (comment != std::string::npos) {
      if (comment == 0) m.comments.push_back(line.size() > 2 ? line.substr(2) : "");
      line = line.substr(0, comment);
    }
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    auto trimmed = line.substr(first, line.find_last_not_of(" \t") - first + 1);
    auto sec = section_of(lower(trimmed));
    if (sec != Section::None) {
      if (sec == Section::Objective) m.maximize = lower(trimmed).rfind("max", 0) == 0;
      section = sec;
      if (sec == Section::End) break;
      continue;
    }
    auto toks = tokens_of(trimmed);
    switch (section) {
      case Section::Objective:
        objective_tokens.insert(objective_tokens.end(), toks.begin(), toks.end());
        break;
      case Section::Rows:
        row_tokens.insert(row_tokens.end(), toks.begin(), toks.end());
        break;
      case Section::Bounds: {
        LpBound b;
        if (toks.size() == 5 && is_sense(toks[1]) && is_sense(toks[3])) {
          b.lower = number_of(toks[0]);
          b.var = toks[2];
          b.upper = number_of(toks[4]);
        } else if (toks.size() == 3 && toks[1] == "=") {
          b.var = toks[0];
          b.lower = b.upper = number_of(toks[2]);
        } else if (toks.size() == 3 && sense_of(toks[1]) == RowSense::Ge) {
          b.var = toks[0];
          b.lower = number_of(toks[2]);
          b.upper = kInf;
        } else if (toks.size() == 3 && sense_of(toks[1]) == RowSense::Le) {
          b.var = toks[0];
          b.lower = 0.0;
          b.upper = number_of(toks[2]);
        } else if (toks.size() == 2 && lower(toks[1]) == "free") {
          b.var = toks[0];
          b.lower = -kInf;
          b.upper = kInf;
        } else {
          throw FormatError("LP: unsupported bound line '" + trimmed + "'");
        }
        m.bounds.push_back(b);
        break;
      }
      case Section::Binaries:
        m.binaries.insert(m.binaries.end(), toks.begin(), toks.end());
        break;
      default:
        throw FormatError("LP: content outside any section: '" + trimmed + "'");
    }
  }
  if (section != Section::End) throw FormatError("LP: missing End");

  std::size_t i = 0;
  if (!objective_tokens.empty() && objective_tokens[0].back() == ':') {
    m.objective_name = objective_tokens[0].substr(0, objective_tokens[0].size() - 1);
    i = 1;
  }
  m.objective = parse_terms(objective_tokens, i, false);

  i = 0;
  while (i < row_tokens.size()) {
    LpRow r;
    if (row_tokens[i].back() == ':') {
      r.name = row_tokens[i].substr(0, row_tokens[i].size() - 1);
      ++i;
    } else {
      r.name = "R" + std::to_string(m.rows.size() + 1);
    }
    r.terms = parse_terms(row_tokens, i, true);
    if (i + 1 >= row_tokens.size()) throw FormatError("LP: row '" + r.name + "' has no rhs");
    r.sense = sense_of(row_tokens[i]);
    r.rhs = number_of(row_tokens[i + 1]);
    i += 2;
    m.rows.push_back(std::move(r));
  }
  return m;
}

LpCheck check_assignment(const LpModel& m, const std::map<std::string, double>& values) {
  auto value_of = [&](const std::string& var) {
    auto it = values.find(var);
    return it == values.end() ? 0.0 : it->second;
  };
  LpCheck out;
  auto note = [&](double violation, const std::string& what) {
    if (violation > out.max_violation) {
      out.max_violation = violation;
      out.worst = what;
    }
  };
  for (const auto& t : m.objective) out.objective += t.coef * value_of(t.var);
  for (const auto& r : m.rows) {
    double lhs = 0.0;
    for (const auto& t : r.terms) lhs += t.coef * value_of(t.var);
    double v = 0.0;
    if (r.sense == RowSense::Le) v = lhs - r.rhs;
    if (r.sense == RowSense::Ge) v = r.rhs - lhs;
    if (r.sense == RowSense::Eq) v = std::abs(lhs - r.rhs);
    note(v, r.name);
  }
  std::map<std::string, std::pair<double, double>> box;
  for (const auto& t : m.objective) box.emplace(t.var, std::pair{0.0, kInf});
  for (const auto& r : m.rows)
    for (const auto& t : r.terms) box.emplace(t.var, std::pair{0.0, kInf});
  for (const auto& b : m.bounds) box[b.var] = {b.lower, b.upper};
  for (const auto& name : m.binaries) {
    box[name] = {0.0, 1.0};
    double x = value_of(name);
    note(std::abs(x - std::round(x)), name + " (integrality)");
  }
  for (const auto& [var, lu] : box) {
    double x = value_of(var);
    note(lu.first - x, var + " (lower bound)");
    note(x - lu.second, var + " (upper bound)");
  }
  return out;
}

namespace {

std::string col(std::string_view base, std::size_t t) {
  return std::string(base) + "_" + std::to_string(t);
}

std::string col(std::string_view base, std::size_t s, std::size_t t) {
  return std::string(base) + "_s" + std::to_string(s) + "_" + std::to_string(t);
}

double awe_objective_coef(const EpisodeData& ep) {
  return hydrogen_out(1.0, ep.plant) * (ep.prices.hydrogen - ep.econ.vom_awe);
}

void add_header(LpModel& m, const EpisodeData& ep, std::string_view kind) {
  auto fixed = annualized_fixed_costs(ep.plant, ep.econ);
  m.comments.push_back(std::string(kind));
  m.comments.push_back("hours: " + std::to_string(ep.horizon()) +
                       "; energies in MWh; soc columns in MWh");
  m.comments.push_back("minimum BESS power is 0, so charge/discharge lower rows reduce to bounds");
  m.comments.push_back("fixed_one carries the annual fixed cost " + format_double(fixed.total()));
}

// Rows for one curtailment realization; `name` spells the recourse columns.
template <class Name>
void add_recourse(LpModel& m, const EpisodeData& ep, const std::vector<double>& totals,
                  Name&& name, bool first_stage_rows) {
  const auto& plant = ep.plant;
  double limit = bess_power_limit(plant);
  double cap = plant.bess_capacity;
  for (std::size_t i = 0; i < totals.size(); ++i) {
    std::size_t t = i + 1;
    m.rows.push_back({name("bal", t),
                      {{totals[i], name("cf", t)}, {-1.0, name("pch", t)}, {-1.0, name("pawe", t)}},
                      RowSense::Eq,
                      0.0});
    if (first_stage_rows)
      m.rows.push_back({col("excl", t), {{1.0, col("zch", t)}, {1.0, col("zdh", t)}},
                        RowSense::Le, 1.0});
    m.rows.push_back({name("chmax", t), {{1.0, name("pch", t)}, {-limit, col("zch", t)}},
                      RowSense::Le, 0.0});
    if (first_stage_rows)
      m.rows.push_back({col("dhmax", t), {{1.0, col("pdh", t)}, {-limit, col("zdh", t)}},
                        RowSense::Le, 0.0});
    LpRow soc{name("socbal", t), {{1.0, name("soc", t)}}, RowSense::Eq, 0.0};
    if (t == 1)
      soc.rhs = plant.soc_initial_fraction * cap;
    else
      soc.terms.push_back({-1.0, name("soc", t - 1)});
    soc.terms.push_back({-plant.eta_charge, name("pch", t)});
    soc.terms.push_back({1.0 / plant.eta_discharge, col("pdh", t)});
    m.rows.push_back(std::move(soc));
    m.rows.push_back({name("awemin", t),
                      {{1.0, name("pawe", t)},
                       {-plant.awe_min_fraction * plant.awe_power_max, col("zawe", t)}},
                      RowSense::Ge,
                      0.0});
    m.rows.push_back({name("awemax", t),
                      {{1.0, name("pawe", t)}, {-plant.awe_power_max, col("zawe", t)}},
                      RowSense::Le,
                      0.0});
    m.bounds.push_back({name("cf", t), 0.0, 1.0});
    m.bounds.push_back({name("soc", t), plant.soc_min_fraction * cap, cap});
  }
}

void add_column_names(LpModel& m, std::size_t T) {
  for (std::size_t t = 1; t <= T; ++t)
    for (const char* z : {"zch", "zdh", "zawe"}) m.binaries.push_back(col(z, t));
  m.bounds.push_back({"fixed_one", 1.0, 1.0});
}

}  // namespace

LpModel build_milp(const EpisodeData& ep) {
  require_valid(ep);
  LpModel m;
  add_header(m, ep, "deterministic hybrid storage dispatch MILP");
  const std::size_t T = ep.horizon();
  double awe_coef = awe_objective_coef(ep);
  for (std::size_t t = 1; t <= T; ++t) {
    m.objective.push_back({ep.prices.electricity[t - 1] - ep.econ.vom_bess, col("pdh", t)});
    m.objective.push_back({awe_coef, col("pawe", t)});
  }
  m.objective.push_back({-annualized_fixed_costs(ep.plant, ep.econ).total(), "fixed_one"});
  auto name = [](std::string_view base, std::size_t t) { return col(base, t); };
  add_recourse(m, ep, ep.curtailment.totals(), name, true);
  add_column_names(m, T);
  return m;
}

LpModel build_so(const EpisodeData& ep, const std::vector<Scenario>& scenarios) {
  require_valid(ep);
  if (scenarios.empty()) throw ValidationError("export_so needs at least one scenario");
  double psum = 0.0;
  for (const auto& s : scenarios) {
    if (s.curtailment.size() != ep.horizon())
      throw ValidationError("scenario length does not match the episode horizon");
    if (!(s.probability >= 0.0)) throw ValidationError("scenario probability must be >= 0");
    psum += s.probability;
  }
  if (std::abs(psum - 1.0) > 1e-9)
    throw ValidationError("scenario probabilities sum to " + format_double(psum) + ", not 1");

  LpModel m;
  add_header(m, ep, "extensive-form stochastic dispatch MILP, " +
                        std::to_string(scenarios.size()) + " curtailment scenarios");
  for (std::size_t s = 0; s < scenarios.size(); ++s)
    m.comments.push_back("scenario " + std::to_string(s + 1) + " probability " +
                         format_double(scenarios[s].probability));
  const std::size_t T = ep.horizon();
  double awe_coef = awe_objective_coef(ep);
  for (std::size_t t = 1; t <= T; ++t) {
    m.objective.push_back({ep.prices.electricity[t - 1] - ep.econ.vom_bess, col("pdh", t)});
    for (std::size_t s = 0; s < scenarios.size(); ++s)
      m.objective.push_back({scenarios[s].probability * awe_coef, col("pawe", s + 1, t)});
  }
  m.objective.push_back({-annualized_fixed_costs(ep.plant, ep.econ).total(), "fixed_one"});
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    auto name = [s](std::string_view base, std::size_t t) { return col(base, s + 1, t); };
    add_recourse(m, ep, scenarios[s].curtailment.totals(), name, s == 0);
  }
  add_column_names(m, T);
  return m;
}

void export_milp(const EpisodeData& episode, const std::filesystem::path& path) {
  write_text_file(path, write_lp(build_milp(episode)));
}

void export_so(const EpisodeData& episode, const std::vector<Scenario>& scenarios,
               const std::filesystem::path& path) {
  write_text_file(path, write_lp(build_so(episode, scenarios)));
}

}  // namespace cplan
