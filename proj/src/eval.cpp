#include "cplan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "cplan/errors.hpp"
#include "cplan/plant.hpp"

namespace cplan {

std::string to_string(UncertaintyModel model) {
  return model == UncertaintyModel::UniformHourly ? "uniform-hourly" : "uniform-episode";
}

UncertaintyModel parse_uncertainty_model(std::string_view text) {
  if (text == "uniform-hourly") return UncertaintyModel::UniformHourly;
  if (text == "uniform-episode") return UncertaintyModel::UniformEpisode;
  throw ValidationError("unknown uncertainty model '" + std::string(text) +
                        "' (expected uniform-hourly or uniform-episode)");
}

ScenarioSet generate_scenarios(const CurtailmentSeries& base, double amplitude, int count,
                               std::uint64_t seed, UncertaintyModel model) {
  if (!(amplitude >= 0.0 && amplitude < 1.0))
    throw ValidationError("uncertainty amplitude must lie in [0, 1), got " +
                          format_double(amplitude));
  if (count < 1) throw ValidationError("scenario count must be >= 1");
  ScenarioSet set{base, amplitude, count, seed, model, {}};
  set.scenarios.reserve(static_cast<std::size_t>(count));
  std::uniform_real_distribution<double> factor(1.0 - amplitude, 1.0 + amplitude);
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    CurtailmentSeries s = base;
    auto draw = [&] { return amplitude == 0.0 ? 1.0 : factor(rng); };
    double f = draw();
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (model == UncertaintyModel::UniformHourly && t > 0) f = draw();
      s.wind[t] = base.wind[t] * f;
      s.solar[t] = base.solar[t] * f;
    }
    set.scenarios.push_back(std::move(s));
  }
  return set;
}

RolloutResult rollout(const PolicyParams& policy, std::shared_ptr<const EpisodeData> episode,
                      const EnvConfig& cfg, bool deterministic, std::uint64_t seed,
                      std::optional<std::vector<double>> forecast) {
  Environment env(std::move(episode), cfg, std::move(forecast));
  std::mt19937_64 rng(seed);
  auto out = run_episode(policy, env, deterministic, deterministic ? nullptr : &rng);
  return {out.profit, out.penalty, out.ret, out.overactions, std::move(out.trace)};
}

Histogram make_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  if (values.empty()) return h;
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b)
    h.edges[static_cast<std::size_t>(b)] = b == bins ? hi : lo + (hi - lo) * b / bins;
  for (double v : values) {
    int b = hi > lo ? static_cast<int>((v - lo) / (hi - lo) * bins) : 0;
    h.counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))] += 1;
  }
  return h;
}

void summarize(EvalReport& report, int histogram_bins) {
  const auto& p = report.profits;
  if (p.empty()) throw ValidationError("evaluation report has no scenarios");
  double n = static_cast<double>(p.size());
  report.mean = std::accumulate(p.begin(), p.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : p) ss += (v - report.mean) * (v - report.mean);
  report.stddev = std::sqrt(ss / n);
  report.histogram = make_histogram(p, histogram_bins);
  if (report.oracle_profit) {
    if (*report.oracle_profit == 0.0) throw ValidationError("oracle profit must be nonzero");
    report.relative_to_oracle = report.mean / *report.oracle_profit;
  } else {
    report.relative_to_oracle.reset();
  }
}

EvalReport monte_carlo(const PolicyParams& policy, const EpisodeData& episode,
                       const ScenarioSet& set, const EnvConfig& cfg,
                       const MonteCarloOptions& options) {
  if (set.scenarios.empty()) throw ValidationError("scenario set is empty");
  if (options.workers < 1) throw ValidationError("workers must be >= 1");
  for (const auto& s : set.scenarios)
    if (s.size() != episode.horizon())
      throw ValidationError("scenario length " + std::to_string(s.size()) +
                            " differs from episode horizon " +
                            std::to_string(episode.horizon()));
  const std::size_t n = set.scenarios.size();
  std::vector<RolloutResult> results(n);
  auto shared = std::make_shared<const EpisodeData>(episode);
  auto run = [&](std::size_t i) {
    if (options.role == ScenarioRole::Actual) {
      auto ep = std::make_shared<EpisodeData>(episode);
      ep->curtailment = set.scenarios[i];
      results[i] = rollout(policy, ep, cfg, true);
    } else {
      results[i] = rollout(policy, shared, cfg, true, 0, set.scenarios[i].totals());
    }
    results[i].trace.clear();
  };
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(options.workers), n);
  std::vector<std::exception_ptr> errors(workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) run(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  EvalReport report;
  report.oracle_profit = options.oracle_profit;
  for (const auto& r : results) {
    report.profits.push_back(r.profit);
    report.penalties.push_back(r.penalty);
  }
  summarize(report, options.histogram_bins);
  return report;
}

std::string to_string(MapAxis axis) {
  return axis == MapAxis::Curtailment ? "curtailment" : "price";
}

MapAxis parse_map_axis(std::string_view text) {
  if (text == "curtailment") return MapAxis::Curtailment;
  if (text == "price") return MapAxis::Price;
  throw ValidationError("unknown action-map axis '" + std::string(text) +
                        "' (expected curtailment or price)");
}

ActionMapGrid action_map(const PolicyParams& policy, const Environment& env,
                         const ActionMapSpec& spec, std::uint64_t seed) {
  const auto& plant = env.episode().plant;
  if (spec.soc_levels.empty() || spec.axis_levels.empty())
    throw ValidationError("action map needs at least one level on each axis");
  if (spec.samples_per_cell < 1) throw ValidationError("samples_per_cell must be >= 1");
  for (double s : spec.soc_levels)
    if (!(s >= plant.soc_min_fraction && s <= 1.0))
      throw ValidationError("action-map SOC level " + format_double(s) + " outside [" +
                            format_double(plant.soc_min_fraction) + ", 1]");
  for (double v : spec.axis_levels)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("action-map " + to_string(spec.axis) + " level " +
                            format_double(v) + " must be finite and >= 0");
  if (static_cast<std::size_t>(policy.net.input_size()) != env.observation_size())
    throw ValidationError("policy expects " + std::to_string(policy.net.input_size()) +
                          " features, environment provides " +
                          std::to_string(env.observation_size()));

  const auto rows = static_cast<Eigen::Index>(spec.soc_levels.size());
  const auto cols = static_cast<Eigen::Index>(spec.axis_levels.size());
  ActionMapGrid grid{spec, Eigen::MatrixXd::Zero(rows, cols), Eigen::MatrixXd::Zero(rows, cols),
                     spec.samples_per_cell};
  const bool ip = env.config().mode == ObservationMode::IP;
  const std::size_t w = static_cast<std::size_t>(env.config().window_w);
  std::uniform_int_distribution<std::size_t> hour(0, env.horizon() - 1);
  const int n = spec.samples_per_cell;

  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i * cols + j)));
      Eigen::MatrixXd x(static_cast<Eigen::Index>(env.observation_size()), n);
      for (int k = 0; k < n; ++k) {
        auto obs = env.observe(hour(rng), spec.soc_levels[static_cast<std::size_t>(i)]);
        double level = spec.axis_levels[static_cast<std::size_t>(j)];
        if (spec.axis == MapAxis::Curtailment)
          obs.curtailment_window[ip ? w - 1 : 0] = level;
        else
          obs.prices_elec[0] = level;
        env.fill_features(obs);
        x.col(k) = Eigen::Map<const Eigen::VectorXd>(obs.features.data(), x.rows());
      }
      Eigen::MatrixXd mean = policy.net.forward(x);
      double bess = 0.0, awe = 0.0;
      for (int k = 0; k < n; ++k) {
        Action a = squash(mean.col(k));
        bess += a.bess;
        awe += a.awe;
      }
      grid.bess(i, j) = bess / n;
      grid.awe(i, j) = awe / n;
    }
  }
  return grid;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("spearman needs two equal-length samples of size >= 2");
  auto rx = average_ranks(x), ry = average_ranks(y);
  double n = static_cast<double>(x.size());
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

std::vector<TraceRow> day_trace(const PolicyParams& policy,
                                std::shared_ptr<const EpisodeData> episode,
                                const EnvConfig& cfg, int day) {
  const std::size_t days = episode->horizon() / 24;
  if (day < 0 || static_cast<std::size_t>(day) >= days)
    throw ValidationError("day " + std::to_string(day) + " outside episode of " +
                          std::to_string(days) + " full days");
  auto r = rollout(policy, std::move(episode), cfg, true);
  auto first = r.trace.begin() + static_cast<std::ptrdiff_t>(day) * 24;
  return {first, first + 24};
}

std::string report_stem(std::string_view kind, std::string_view policy_id, std::uint64_t seed,
                        double amplitude) {
  std::ostringstream os;
  os << kind << '_' << policy_id << "_seed" << seed << "_u" << format_double(amplitude);
  return os.str();
}

std::string format_report_csv(const EvalReport& report) {
  std::string out = "scenario,profit,penalty\n";
  for (std::size_t i = 0; i < report.profits.size(); ++i)
    out += std::to_string(i) + ',' + format_double(report.profits[i]) + ',' +
           format_double(report.penalties[i]) + '\n';
  return out;
}

std::string format_histogram_csv(const Histogram& h) {
  std::string out = "bin,lower,upper,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    double lo = h.edges.empty() ? 0.0 : h.edges[b];
    double hi = h.edges.empty() ? 0.0 : h.edges[b + 1];
    out += std::to_string(b) + ',' + format_double(lo) + ',' + format_double(hi) + ',' +
           std::to_string(h.counts[b]) + '\n';
  }
  return out;
}

nlohmann::json report_summary(const EvalReport& report) {
  nlohmann::json j;
  j["scenarios"] = report.profits.size();
  j["mean_profit"] = report.mean;
  j["std_profit"] = report.stddev;
  j["min_profit"] = *std::min_element(report.profits.begin(), report.profits.end());
  j["max_profit"] = *std::max_element(report.profits.begin(), report.profits.end());
  j["mean_penalty"] = std::accumulate(report.penalties.begin(), report.penalties.end(), 0.0) /
                      static_cast<double>(report.penalties.size());
  j["histogram_bins"] = report.histogram.counts.size();
  if (report.oracle_profit) j["oracle_profit"] = *report.oracle_profit;
  if (report.relative_to_oracle) j["relative_to_oracle"] = *report.relative_to_oracle;
  return j;
}

std::string format_action_map_csv(const ActionMapGrid& grid) {
  std::string out = "soc," + to_string(grid.spec.axis) + ",bess,awe,samples\n";
  for (Eigen::Index i = 0; i < grid.bess.rows(); ++i)
    for (Eigen::Index j = 0; j < grid.bess.cols(); ++j)
      out += format_double(grid.spec.soc_levels[static_cast<std::size_t>(i)]) + ',' +
             format_double(grid.spec.axis_levels[static_cast<std::size_t>(j)]) + ',' +
             format_double(grid.bess(i, j)) + ',' + format_double(grid.awe(i, j)) + ',' +
             std::to_string(grid.evaluations_per_cell) + '\n';
  return out;
}

}  // namespace cplan
