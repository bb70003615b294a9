#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "cplan/agent.hpp"
#include "cplan/config.hpp"
#include "cplan/errors.hpp"
#include "cplan/eval.hpp"
#include "cplan/lp_model.hpp"
#include "cplan/oracle.hpp"

namespace cplan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct OptionSpec {
  const char* name;
  const char* help;
  bool positional = false;
};

struct CommandSpec {
  const char* name;
  const char* help;
  std::vector<OptionSpec> options;
};

const std::vector<OptionSpec> kCommon = {
    {"config", "config file (default: $CURTAIL_PLAN_CONFIG)"},
    {"seed", "seed for every random stream (overrides [run] seed)"},
    {"workers", "worker threads (overrides [run] workers)"},
    {"out", "output directory (default: .)"},
};

const std::set<std::string> kPathOptions = {"raw",  "output", "checkpoint", "data",
                                            "config", "out", "manifest"};

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> specs = {
      {"ingest", "aggregate 15-minute curtailment records into an hourly series",
       {{"raw", "raw quarter-hour CSV", true}, {"output", "hourly CSV to write", true}}},
      {"train", "train the dispatch policy; writes checkpoint.bin, curve.csv, summary.json",
       {{"total-steps", "override [train] total_steps"},
        {"target-profit", "stop once the evaluation profit reaches this"},
        {"baseline", "also solve the DP baseline for the summary (true|false)"}}},
      {"evaluate", "Monte Carlo evaluation of a checkpoint",
       {{"checkpoint", "policy checkpoint"},
        {"data", "hourly curtailment series to evaluate on (default: config data)"},
        {"uncertainty", "amplitude u of the multiplicative noise"},
        {"scenarios", "number of scenarios N"},
        {"model", "uniform-hourly | uniform-episode"},
        {"role", "actual | forecast (noise on the EP prediction window only)"},
        {"bins", "histogram bins"},
        {"oracle-profit", "report the mean relative to this profit"}}},
      {"oracle", "dynamic-programming oracle; writes plan.csv and oracle.json",
       {{"grid", "SOC grid levels K"},
        {"levels", "electrolyzer action levels M"},
        {"hours", "use only the first N hours"}}},
      {"export-milp", "write the deterministic MILP as milp.lp",
       {{"hours", "use only the first N hours"}}},
      {"export-so", "write the two-stage stochastic program as so.lp",
       {{"hours", "use only the first N hours"},
        {"uncertainty", "amplitude u"},
        {"scenarios", "number of scenarios"},
        {"model", "uniform-hourly | uniform-episode"}}},
      {"action-map", "average policy actions over an SOC x curtailment or SOC x price grid",
       {{"checkpoint", "policy checkpoint"},
        {"axis", "curtailment | price"},
        {"soc-levels", "comma-separated SOC fractions"},
        {"levels", "comma-separated curtailment [MWh] or price [$/MWh] levels"},
        {"samples", "samples per cell"}}},
      {"trace", "24-hour dispatch trace of one day",
       {{"checkpoint", "policy checkpoint"}, {"day", "0-based day index"}}},
      {"replay", "rerun a command from its manifest",
       {{"manifest", "manifest JSON", true}}},
  };
  return specs;
}

const std::string* find(const Invocation& inv, const std::string& key) {
  auto it = inv.options.find(key);
  return it == inv.options.end() ? nullptr : &it->second;
}

template <class Int>
Int to_integer(const std::string& text, const std::string& what) {
  Int v{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || p != text.data() + text.size())
    throw ValidationError("--" + what + " expects an integer, got '" + text + "'");
  return v;
}

template <class Int>
Int integer_or(const Invocation& inv, const std::string& key, Int fallback) {
  const auto* s = find(inv, key);
  return s ? to_integer<Int>(*s, key) : fallback;
}

double number_or(const Invocation& inv, const std::string& key, double fallback) {
  const auto* s = find(inv, key);
  return s ? parse_double(*s, "--" + key) : fallback;
}

std::string text_or(const Invocation& inv, const std::string& key, std::string fallback) {
  const auto* s = find(inv, key);
  return s ? *s : fallback;
}

const std::string& required(const Invocation& inv, const std::string& key) {
  const auto* s = find(inv, key);
  if (!s) throw ValidationError(inv.command + " requires --" + key);
  return *s;
}

std::vector<double> number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, "--" + what));
  if (out.empty()) throw ValidationError("--" + what + " needs at least one value");
  return out;
}

bool boolean_or(const Invocation& inv, const std::string& key, bool fallback) {
  const auto* s = find(inv, key);
  if (!s) return fallback;
  if (*s == "true" || *s == "1") return true;
  if (*s == "false" || *s == "0") return false;
  throw ValidationError("--" + key + " expects true or false, got '" + *s + "'");
}

RunConfig resolve_config(const Invocation& inv) {
  RunConfig cfg;
  if (inv.config_snapshot) {
    cfg = parse_config(*inv.config_snapshot, "/");
  } else if (const auto* path = find(inv, "config")) {
    cfg = load_config(*path);
  } else if (const char* env = std::getenv(kConfigEnv); env && *env) {
    cfg = load_config(env);
  } else {
    cfg = parse_config("", fs::current_path());
  }
  if (const auto* s = find(inv, "seed")) {
    cfg.seed = to_integer<std::uint64_t>(*s, "seed");
    cfg.train.seed = cfg.seed;
  }
  if (const auto* s = find(inv, "workers")) {
    cfg.workers = to_integer<int>(*s, "workers");
    if (cfg.workers < 1) throw ValidationError("--workers must be >= 1");
    cfg.train.workers = cfg.workers;
  }
  return cfg;
}

EpisodeData truncated(EpisodeData ep, const Invocation& inv) {
  const auto* s = find(inv, "hours");
  if (!s) return ep;
  auto hours = to_integer<std::size_t>(*s, "hours");
  if (hours < 1 || hours > ep.horizon())
    throw ValidationError("--hours must lie in [1, " + std::to_string(ep.horizon()) + "]");
  ep.curtailment.wind.resize(hours);
  ep.curtailment.solar.resize(hours);
  ep.prices.electricity.resize(hours);
  return ep;
}

struct Context {
  const Invocation& inv;
  RunConfig cfg;
  fs::path out_dir;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  json extra = json::object();
};

void write_manifest(const Context& ctx, const fs::path& path) {
  json m;
  m["command"] = ctx.inv.command;
  m["tool_version"] = kToolVersion;
  m["seed"] = ctx.cfg.seed;
  json opts = json::object();
  for (const auto& [k, v] : ctx.inv.options)
    if (k != "config") opts[k] = v;
  m["options"] = opts;
  m["config"] = format_config(ctx.cfg);
  json inputs = json::array();
  for (const auto& p : ctx.inputs)
    inputs.push_back({{"path", fs::absolute(p).lexically_normal().string()},
                      {"sha256", file_sha256(p)}});
  m["inputs"] = inputs;
  json outputs = json::array();
  for (const auto& p : ctx.outputs) outputs.push_back(fs::absolute(p).lexically_normal().string());
  m["outputs"] = outputs;
  for (auto it = ctx.extra.begin(); it != ctx.extra.end(); ++it) m[it.key()] = it.value();
  write_text_file(path, m.dump(2) + "\n");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void begin(Context& ctx, const fs::path& manifest_path) {
  ensure_dir(manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path());
  write_manifest(ctx, manifest_path);
}

fs::path manifest_in(const Context& ctx) {
  return ctx.out_dir / (ctx.inv.command + ".manifest.json");
}

std::string policy_id(const fs::path& checkpoint) { return checkpoint.stem().string(); }

PolicyParams load_policy(const fs::path& path, const Environment& env) {
  auto policy = load_checkpoint(path).first;
  if (static_cast<std::size_t>(policy.net.input_size()) != env.observation_size())
    throw ValidationError("checkpoint '" + path.string() + "' expects " +
                          std::to_string(policy.net.input_size()) +
                          " observation features, configured environment provides " +
                          std::to_string(env.observation_size()));
  return policy;
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

void cmd_ingest(Context& ctx, std::ostream& out) {
  fs::path raw = required(ctx.inv, "raw");
  fs::path output = required(ctx.inv, "output");
  ctx.inputs = {raw};
  ctx.outputs = {output};
  auto manifest = output;
  manifest += ".manifest.json";
  begin(ctx, manifest);
  auto series = ingest_curtailment(read_quarter_records(raw));
  write_text_file(output, format_hourly_series(series));
  out << "ingested " << series.size() << " hours starting "
      << format_iso8601(series.start_timestamp) << " -> " << output.string() << "\n";
}

void cmd_train(Context& ctx, std::ostream& out) {
  auto& cfg = ctx.cfg;
  cfg.train.total_steps = integer_or<long>(ctx.inv, "total-steps", cfg.train.total_steps);
  cfg.train.target_profit = number_or(ctx.inv, "target-profit", cfg.train.target_profit);
  bool baseline = boolean_or(ctx.inv, "baseline", true);
  for (const auto& issue : validate(cfg.train)) throw ValidationError(issue);
  ctx.inputs = {cfg.data.curtailment, cfg.data.prices};
  auto ckpt = ctx.out_dir / "checkpoint.bin";
  auto curve_path = ctx.out_dir / "curve.csv";
  auto summary_path = ctx.out_dir / "summary.json";
  ctx.outputs = {ckpt, curve_path, summary_path};
  begin(ctx, manifest_in(ctx));

  auto ep = std::make_shared<const EpisodeData>(load_episode(cfg));
  TrainHooks hooks;
  hooks.on_iteration = [&](const CurvePoint& p, const UpdateStats& s) {
    out << "iteration " << p.iteration << " steps " << p.steps << " profit "
        << format_double(p.profit) << " return " << format_double(p.ret) << " overactions "
        << p.overactions << " kl " << format_double(s.mean_approx_kl) << "\n";
    out.flush();
  };
  auto res = train([&](std::size_t) { return Environment(ep, cfg.env); }, cfg.train, hooks);
  save_checkpoint(ckpt, res.policy, res.value);
  write_text_file(curve_path, format_curve(res.curve));

  Environment env(ep, cfg.env);
  auto final_run = run_episode(res.policy, env, true);
  json s;
  s["iterations"] = res.curve.size();
  s["steps"] = res.curve.empty() ? 0L : res.curve.back().steps;
  s["final_profit"] = final_run.profit;
  s["final_return"] = final_run.ret;
  s["final_overactions"] = final_run.overactions;
  double best = final_run.profit;
  for (const auto& p : res.curve) best = std::max(best, p.profit);
  s["best_logged_profit"] = best;
  if (baseline) {
    Discretization disc{SocGrid::uniform(cfg.plant.soc_min_fraction, cfg.oracle.grid_levels),
                        cfg.oracle.action_levels};
    auto plan = dp_solve(*ep, disc, {cfg.oracle.max_evaluations});
    s["dp_profit"] = plan.profit;
    s["dp_grid_levels"] = cfg.oracle.grid_levels;
    s["dp_action_levels"] = cfg.oracle.action_levels;
    s["relative_to_dp"] = final_run.profit / plan.profit;
    out << "final profit " << format_double(final_run.profit) << " = "
        << format_double(final_run.profit / plan.profit) << " of dp_solve "
        << format_double(plan.profit) << "\n";
  } else {
    out << "final profit " << format_double(final_run.profit) << "\n";
  }
  write_text_file(summary_path, json_text(s));
}

void cmd_evaluate(Context& ctx, std::ostream& out) {
  auto& cfg = ctx.cfg;
  fs::path ckpt = required(ctx.inv, "checkpoint");
  double u = number_or(ctx.inv, "uncertainty", cfg.eval.uncertainty);
  int n = integer_or<int>(ctx.inv, "scenarios", cfg.eval.scenarios);
  auto model = parse_uncertainty_model(text_or(ctx.inv, "model", to_string(cfg.eval.model)));
  std::string role_text = text_or(ctx.inv, "role", "actual");
  if (role_text != "actual" && role_text != "forecast")
    throw ValidationError("--role must be actual or forecast, got '" + role_text + "'");
  MonteCarloOptions opt;
  opt.role = role_text == "actual" ? ScenarioRole::Actual : ScenarioRole::Forecast;
  opt.histogram_bins = integer_or<int>(ctx.inv, "bins", cfg.eval.histogram_bins);
  opt.workers = cfg.workers;
  if (const auto* s = find(ctx.inv, "oracle-profit")) opt.oracle_profit = parse_double(*s, "--oracle-profit");
  if (const auto* s = find(ctx.inv, "data")) cfg.data.curtailment = fs::absolute(*s).lexically_normal();

  ctx.inputs = {ckpt, cfg.data.curtailment, cfg.data.prices};
  std::string stem = report_stem(role_text == "actual" ? "mc" : "forecast", policy_id(ckpt),
                                 cfg.seed, u);
  auto csv = ctx.out_dir / (stem + ".csv");
  auto hist = ctx.out_dir / (stem + "_hist.csv");
  auto summary = ctx.out_dir / (stem + ".json");
  ctx.outputs = {csv, hist, summary};
  begin(ctx, manifest_in(ctx));

  auto ep = load_episode(cfg);
  Environment env(std::make_shared<const EpisodeData>(ep), cfg.env);
  auto policy = load_policy(ckpt, env);
  auto set = generate_scenarios(ep.curtailment, u, n, cfg.seed, model);
  auto rep = monte_carlo(policy, ep, set, cfg.env, opt);
  auto j = report_summary(rep);
  j["policy"] = policy_id(ckpt);
  j["uncertainty"] = u;
  j["model"] = to_string(model);
  j["role"] = role_text;
  j["seed"] = cfg.seed;
  write_text_file(csv, format_report_csv(rep));
  write_text_file(hist, format_histogram_csv(rep.histogram));
  write_text_file(summary, json_text(j));
  out << "mean profit " << format_double(rep.mean) << " std " << format_double(rep.stddev)
      << " over " << n << " scenarios";
  if (rep.relative_to_oracle)
    out << ", relative to oracle " << format_double(*rep.relative_to_oracle);
  out << "\n";
}

void cmd_oracle(Context& ctx, std::ostream& out) {
  auto& cfg = ctx.cfg;
  int K = integer_or<int>(ctx.inv, "grid", cfg.oracle.grid_levels);
  int M = integer_or<int>(ctx.inv, "levels", cfg.oracle.action_levels);
  ctx.inputs = {cfg.data.curtailment, cfg.data.prices};
  auto plan_path = ctx.out_dir / "plan.csv";
  auto summary = ctx.out_dir / "oracle.json";
  ctx.outputs = {plan_path, summary};
  begin(ctx, manifest_in(ctx));
  auto ep = truncated(load_episode(cfg), ctx.inv);
  Discretization disc{SocGrid::uniform(cfg.plant.soc_min_fraction, K), M};
  auto plan = dp_solve(ep, disc, {cfg.oracle.max_evaluations});
  write_text_file(plan_path, format_plan(ep, plan));
  json j;
  j["profit"] = plan.profit;
  j["grid_levels"] = K;
  j["action_levels"] = M;
  j["hours"] = ep.horizon();
  j["relaxation_upper_bound"] = relaxation_upper_bound(ep);
  write_text_file(summary, json_text(j));
  out << "dp_solve profit " << format_double(plan.profit) << " (K " << K << ", M " << M << ", T "
      << ep.horizon() << ")\n";
}

void cmd_export_milp(Context& ctx, std::ostream& out) {
  auto& cfg = ctx.cfg;
  ctx.inputs = {cfg.data.curtailment, cfg.data.prices};
  auto path = ctx.out_dir / "milp.lp";
  ctx.outputs = {path};
  begin(ctx, manifest_in(ctx));
  auto ep = truncated(load_episode(cfg), ctx.inv);
  auto model = build_milp(ep);
  write_text_file(path, write_lp(model));
  out << "wrote " << path.string() << ": " << model.rows.size() << " rows, "
      << model.binaries.size() << " binaries\n";
}

void cmd_export_so(Context& ctx, std::ostream& out) {
  auto& cfg = ctx.cfg;
  double u = number_or(ctx.inv, "uncertainty", cfg.eval.uncertainty);
  int n = integer_or<int>(ctx.inv, "scenarios", cfg.eval.scenarios);
  auto model_kind = parse_uncertainty_model(text_or(ctx.inv, "model", to_string(cfg.eval.model)));
  ctx.inputs = {cfg.data.curtailment, cfg.data.prices};
  auto path = ctx.out_dir / "so.lp";
  ctx.outputs = {path};
  begin(ctx, manifest_in(ctx));
  auto ep = truncated(load_episode(cfg), ctx.inv);
  auto set = generate_scenarios(ep.curtailment, u, n, cfg.seed, model_kind);
  std::vector<Scenario> scenarios;
  for (auto& s : set.scenarios) scenarios.push_back({std::move(s), 1.0 / n});
  auto model = build_so(ep, scenarios);
  write_text_file(path, write_lp(model));
  out << "wrote " << path.string() << ": " << n << " scenarios, " << model.rows.size()
      << " rows, " << model.binaries.size() << " binaries\n";
}

std::vector<double> default_levels(MapAxis axis) {
  std::vector<double> v;
  if (axis == MapAxis::Curtailment)
    for (int i = 0; i <= 10; ++i) v.push_back(100.0 * i);
  else
    for (int i = 0; i <= 8; ++i) v.push_back(50.0 * i);
  return v;
}

void cmd_action_map(Context& ctx, std::ostream& out) {
  auto& cfg = ctx.cfg;
  fs::path ckpt = required(ctx.inv, "checkpoint");
  ActionMapSpec spec;
  spec.axis = parse_map_axis(text_or(ctx.inv, "axis", "curtailment"));
  if (const auto* s = find(ctx.inv, "soc-levels")) {
    spec.soc_levels = number_list(*s, "soc-levels");
  } else {
    for (int i = 1; i <= 10; ++i) spec.soc_levels.push_back(i / 10.0);
  }
  spec.axis_levels = find(ctx.inv, "levels") ? number_list(*find(ctx.inv, "levels"), "levels")
                                             : default_levels(spec.axis);
  spec.samples_per_cell = integer_or<int>(ctx.inv, "samples", cfg.eval.samples_per_cell);
  ctx.inputs = {ckpt, cfg.data.curtailment, cfg.data.prices};
  auto path = ctx.out_dir / ("map_" + to_string(spec.axis) + "_" + policy_id(ckpt) + "_seed" +
                             std::to_string(cfg.seed) + ".csv");
  ctx.outputs = {path};
  ctx.extra["samples_per_cell"] = spec.samples_per_cell;
  begin(ctx, manifest_in(ctx));
  auto ep = std::make_shared<const EpisodeData>(load_episode(cfg));
  Environment env(ep, cfg.env);
  auto policy = load_policy(ckpt, env);
  auto grid = action_map(policy, env, spec, cfg.seed);
  write_text_file(path, format_action_map_csv(grid));
  out << "wrote " << path.string() << ": " << spec.soc_levels.size() << " x "
      << spec.axis_levels.size() << " cells, " << spec.samples_per_cell << " samples each\n";
}

void cmd_trace(Context& ctx, std::ostream& out) {
  auto& cfg = ctx.cfg;
  fs::path ckpt = required(ctx.inv, "checkpoint");
  int day = integer_or<int>(ctx.inv, "day", 0);
  ctx.inputs = {ckpt, cfg.data.curtailment, cfg.data.prices};
  auto path = ctx.out_dir / ("trace_" + policy_id(ckpt) + "_day" + std::to_string(day) + ".csv");
  ctx.outputs = {path};
  begin(ctx, manifest_in(ctx));
  auto ep = std::make_shared<const EpisodeData>(load_episode(cfg));
  Environment env(ep, cfg.env);
  auto policy = load_policy(ckpt, env);
  auto rows = day_trace(policy, ep, cfg.env, day);
  write_text_file(path, format_trace(rows));
  out << "wrote " << path.string() << "\n";
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

std::string file_sha256(const fs::path& path) { return sha256_hex(read_text_file(path)); }

Invocation replay_invocation(const json& manifest, const fs::path& out_dir) {
  Invocation inv;
  try {
    inv.command = manifest.at("command").get<std::string>();
    for (auto it = manifest.at("options").begin(); it != manifest.at("options").end(); ++it)
      inv.options[it.key()] = it.value().get<std::string>();
    inv.config_snapshot = manifest.at("config").get<std::string>();
    for (const auto& in : manifest.at("inputs")) {
      fs::path p = in.at("path").get<std::string>();
      if (file_sha256(p) != in.at("sha256").get<std::string>())
        throw ValidationError("input '" + p.string() + "' changed since the manifest was written");
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  if (inv.command == "replay") throw ValidationError("a replay manifest cannot be replayed");
  if (inv.command == "ingest") {
    fs::path original = inv.options.at("output");
    inv.options["output"] = (out_dir / original.filename()).string();
  } else {
    inv.options["out"] = out_dir.string();
  }
  return inv;
}

namespace {

struct Parser {
  CLI::App app{"Hybrid battery and electrolyzer dispatch planning", "curtail-plan"};
  std::map<std::string, std::map<std::string, std::string>> store;
  std::map<std::string, CLI::App*> subs;

  Parser() {
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", kToolVersion);
    for (const auto& spec : commands()) {
      const std::string name = spec.name;
      auto* sub = app.add_subcommand(name, spec.help);
      subs[name] = sub;
      auto& values = store[name];
      auto add = [&](const OptionSpec& o) {
        std::string flag = o.positional ? o.name : std::string("--") + o.name;
        auto* opt = sub->add_option(flag, values[o.name], o.help);
        if (o.positional) opt->required();
      };
      for (const auto& o : spec.options) add(o);
      if (name == "replay") {
        add({"out", "output directory for the rerun"});
        continue;
      }
      for (const auto& o : kCommon)
        if (name != "ingest" || std::string(o.name) == "config") add(o);
    }
  }

  Invocation parse(const std::vector<std::string>& args) {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    Invocation inv;
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      inv.command = name;
      for (const auto& [key, value] : store[name]) {
        std::string flag = sub->get_option_no_throw("--" + key) ? "--" + key : key;
        if (sub->count(flag) == 0) continue;
        inv.options[key] = kPathOptions.count(key) ? fs::absolute(value).lexically_normal().string()
                                                   : value;
      }
    }
    return inv;
  }
};

}  // namespace

Invocation parse_invocation(const std::vector<std::string>& args) { return Parser().parse(args); }

void execute(const Invocation& inv, std::ostream& out) {
  if (inv.command == "replay") {
    fs::path manifest_path = inv.options.at("manifest");
    json manifest;
    try {
      manifest = json::parse(read_text_file(manifest_path));
    } catch (const json::exception& e) {
      throw FormatError("manifest '" + manifest_path.string() + "' is not JSON: " + e.what());
    }
    fs::path out_dir = text_or(inv, "out", ".");
    execute(replay_invocation(manifest, out_dir), out);
    return;
  }
  Context ctx{inv, resolve_config(inv), fs::path(text_or(inv, "out", ".")), {}, {}};
  if (inv.command == "ingest") return cmd_ingest(ctx, out);
  if (inv.command == "train") return cmd_train(ctx, out);
  if (inv.command == "evaluate") return cmd_evaluate(ctx, out);
  if (inv.command == "oracle") return cmd_oracle(ctx, out);
  if (inv.command == "export-milp") return cmd_export_milp(ctx, out);
  if (inv.command == "export-so") return cmd_export_so(ctx, out);
  if (inv.command == "action-map") return cmd_action_map(ctx, out);
  if (inv.command == "trace") return cmd_trace(ctx, out);
  throw ValidationError("unknown command '" + inv.command + "'");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Parser parser;
  try {
    execute(parser.parse(args), out);
    return 0;
  } catch (const CLI::ParseError& e) {
    return parser.app.exit(e, out, err) == 0 ? 0 : 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cplan::cli
