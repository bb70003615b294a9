#include "cplan/env.hpp"

#include <algorithm>
#include <cmath>

#include "cplan/errors.hpp"

namespace cplan {

std::string to_string(ObservationMode mode) { return mode == ObservationMode::IP ? "IP" : "EP"; }

ObservationMode parse_observation_mode(std::string_view text) {
  if (text == "IP" || text == "ip") return ObservationMode::IP;
  if (text == "EP" || text == "ep") return ObservationMode::EP;
  throw ValidationError("mode must be IP or EP, got '" + std::string(text) + "'");
}

std::vector<std::string> validate(const EnvConfig& cfg) {
  std::vector<std::string> v;
  if (cfg.window_w < 1) v.emplace_back("window_w must be >= 1");
  if (!(cfg.penalty_factor >= 0.0)) v.emplace_back("penalty_factor must be >= 0");
  return v;
}

Dispatch decode_action(const Action& a, const PlantConfig& plant) {
  if (!std::isfinite(a.bess) || !std::isfinite(a.awe))
    throw NumericalError("non-finite action");
  if (a.bess < -1.0 || a.bess > 1.0 || a.awe < 0.0 || a.awe > 1.0)
    throw ValidationError("action outside [-1, 1] x [0, 1]");
  Dispatch d;
  double limit = bess_power_limit(plant);
  if (a.bess >= 0.0)
    d.p_charge = a.bess * limit;
  else
    d.p_discharge = -a.bess * limit;
  d.p_awe = a.awe < plant.awe_min_fraction ? 0.0 : a.awe * plant.awe_power_max;
  return d;
}

double penalty(const Dispatch& d, double soc, double available, const PlantConfig& plant) {
  double cap = plant.bess_capacity;
  double over_charge = d.p_charge * plant.eta_charge - (1.0 - soc) * cap;
  double over_discharge = d.p_discharge / plant.eta_discharge - (soc - plant.soc_min_fraction) * cap;
  double over_supply = d.p_charge + d.p_awe - available;
  return std::max(0.0, over_charge) + std::max(0.0, over_discharge) +
         std::max(0.0, over_supply);
}

StepInfo overaction_flags(const Dispatch& d, double soc, double available,
                          const PlantConfig& plant) {
  double cap = plant.bess_capacity;
  StepInfo info;
  info.overcharge = d.p_charge * plant.eta_charge > (1.0 - soc) * cap;
  info.overdischarge =
      d.p_discharge / plant.eta_discharge > (soc - plant.soc_min_fraction) * cap;
  info.awe_exceedance = d.p_charge + d.p_awe > available;
  return info;
}

namespace {

// Largest x <= value with check(x) true; check must hold a few ulps below.
template <class Check>
double step_down_until(double value, Check&& check) {
  while (value > 0.0 && !check(value)) value = std::nextafter(value, 0.0);
  return std::max(value, 0.0);
}

}  // namespace

Dispatch filter_action(const Dispatch& d, double soc, double available,
                       const PlantConfig& plant) {
  double cap = plant.bess_capacity;
  double headroom = std::max(0.0, (1.0 - soc) * cap);
  double stored = std::max(0.0, (soc - plant.soc_min_fraction) * cap);
  available = std::max(0.0, available);

  Dispatch out;
  double charge = std::min({d.p_charge, headroom / plant.eta_charge, available});
  out.p_charge = step_down_until(charge, [&](double c) {
    return c * plant.eta_charge <= headroom && c <= available;
  });

  double awe = std::min(d.p_awe, available - out.p_charge);
  awe = step_down_until(awe, [&](double a) { return out.p_charge + a <= available; });
  out.p_awe = awe < plant.awe_min_fraction * plant.awe_power_max ? 0.0 : awe;

  double discharge = std::min(d.p_discharge, stored * plant.eta_discharge);
  out.p_discharge =
      step_down_until(discharge, [&](double x) { return x / plant.eta_discharge <= stored; });
  return out;
}

double reward(const Dispatch& d, double penalty_raw, double hour_price, double h2_price,
              const PlantConfig& plant, const EconomicConfig& econ, const EnvConfig& cfg,
              std::size_t horizon) {
  auto e = hour_economics(d, hour_price, h2_price, econ, plant);
  auto fixed = annualized_fixed_costs(plant, econ);
  return e.revenue - e.vom - (fixed.c_fo + fixed.c_acc) / static_cast<double>(horizon) -
         penalty_raw * cfg.penalty_factor;
}

std::string format_trace(const std::vector<TraceRow>& rows) {
  std::string out = "t,soc,p_ch,p_dh,p_awe,h2_kg,price,reward,penalty\n";
  for (const auto& r : rows) {
    out += std::to_string(r.t);
    for (double x : {r.soc, r.p_ch, r.p_dh, r.p_awe, r.h2_kg, r.price, r.reward, r.penalty}) {
      out += ',';
      out += format_double(x);
    }
    out += '\n';
  }
  return out;
}

std::vector<TraceRow> parse_trace(std::string_view text) {
  std::vector<TraceRow> rows;
  std::size_t pos = text.find('\n');
  if (pos == std::string_view::npos || text.substr(0, pos) != "t,soc,p_ch,p_dh,p_awe,h2_kg,price,reward,penalty")
    throw FormatError("trace: unexpected header");
  pos += 1;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    auto line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::size_t s = 0;
    while (true) {
      auto c = line.find(',', s);
      f.push_back(line.substr(s, c == std::string_view::npos ? line.size() - s : c - s));
      if (c == std::string_view::npos) break;
      s = c + 1;
    }
    if (f.size() != 9) throw FormatError("trace: expected 9 fields");
    TraceRow r;
    r.t = static_cast<std::size_t>(parse_double(f[0], "t"));
    double* dst[] = {&r.soc, &r.p_ch, &r.p_dh, &r.p_awe, &r.h2_kg, &r.price, &r.reward, &r.penalty};
    for (int i = 0; i < 8; ++i) *dst[i] = parse_double(f[i + 1], "trace field");
    rows.push_back(r);
  }
  return rows;
}

Environment::Environment(std::shared_ptr<const EpisodeData> episode, EnvConfig cfg,
                         std::optional<std::vector<double>> forecast)
    : episode_(std::move(episode)), cfg_(cfg) {
  auto problems = validate(cfg_);
  if (!problems.empty()) throw ValidationError(problems.front());
  totals_ = episode_->curtailment.totals();
  if (forecast) {
    if (forecast->size() != totals_.size())
      throw ValidationError("forecast length does not match the episode horizon");
    observed_ = std::move(*forecast);
  } else {
    observed_ = totals_;
  }
  fixed_ = annualized_fixed_costs(episode_->plant, episode_->econ);
  const auto& prices = episode_->prices.electricity;
  double mx = prices.empty() ? 0.0 : *std::max_element(prices.begin(), prices.end());
  max_price_ = mx > 0.0 ? mx : 1.0;
}

Observation Environment::reset(std::uint64_t /*seed*/) {
  if (static_cast<std::size_t>(cfg_.window_w) > totals_.size())
    throw ValidationError("window_w " + std::to_string(cfg_.window_w) +
                          " exceeds the episode horizon " + std::to_string(totals_.size()));
  t_ = 0;
  soc_ = episode_->plant.soc_initial_fraction;
  started_ = true;
  return observe(t_, soc_);
}

Observation Environment::observe(std::size_t t, double soc) const {
  const auto W = static_cast<std::size_t>(cfg_.window_w);
  const auto T = totals_.size();
  const auto& prices = episode_->prices;
  Observation obs;
  obs.mode = cfg_.mode;
  obs.soc = soc;
  obs.remaining_capacity = 1.0 - soc;
  obs.prices_elec.assign(W, 0.0);
  obs.price_h2.assign(W, prices.hydrogen);
  obs.curtailment_window.assign(W, 0.0);
  for (std::size_t k = 0; k < W; ++k) {
    if (t + k < T) obs.prices_elec[k] = prices.electricity[t + k];
    if (cfg_.mode == ObservationMode::EP) {
      if (t + k < T) obs.curtailment_window[k] = observed_[t + k];
    } else {
      // position k holds hour t - W + k
      if (t + k >= W && t + k - W < T) obs.curtailment_window[k] = totals_[t + k - W];
    }
  }
  fill_features(obs);
  return obs;
}

void Environment::fill_features(Observation& obs) const {
  const auto W = static_cast<std::size_t>(cfg_.window_w);
  const auto& plant = episode_->plant;
  obs.features.assign(observation_length(cfg_.window_w), 0.0);
  obs.features[0] = obs.soc;
  obs.features[1] = obs.remaining_capacity;
  double h2_scale = plant.eta_awe / plant.lhv / max_price_;
  for (std::size_t k = 0; k < W; ++k) {
    obs.features[2 + k] = obs.prices_elec[k] / max_price_;
    obs.features[2 + W + k] = obs.price_h2[k] * h2_scale;
    obs.features[2 + 2 * W + k] = obs.curtailment_window[k] / plant.bess_capacity;
  }
}

StepResult Environment::step(const Action& a) {
  if (!started_) throw ValidationError("step called before reset");
  if (done()) throw ValidationError("step called after the episode is done");
  const auto& ep = *episode_;
  double available = totals_[t_];
  Dispatch raw = decode_action(a, ep.plant);

  StepResult r;
  r.penalty_raw = penalty(raw, soc_, available, ep.plant);
  r.info = overaction_flags(raw, soc_, available, ep.plant);
  r.dispatch_applied = cfg_.filtration_enabled ? filter_action(raw, soc_, available, ep.plant) : raw;
  r.record = make_record(ep, t_, BessState{soc_}, r.dispatch_applied);
  r.reward = r.record.revenue - r.record.vom_cost -
             fixed_.total() / static_cast<double>(totals_.size()) -
             r.penalty_raw * cfg_.penalty_factor;
  soc_ = r.record.soc_after;
  ++t_;
  r.done = done();
  r.observation = observe(t_, soc_);
  return r;
}

TraceRow Environment::trace_row(const StepResult& r) const {
  TraceRow row;
  row.t = t_ - 1;
  row.soc = r.record.soc_after;
  row.p_ch = r.dispatch_applied.p_charge;
  row.p_dh = r.dispatch_applied.p_discharge;
  row.p_awe = r.dispatch_applied.p_awe;
  row.h2_kg = r.record.hydrogen_kg;
  row.price = episode_->prices.electricity[row.t];
  row.reward = r.reward;
  row.penalty = r.penalty_raw;
  return row;
}

}  // namespace cplan
