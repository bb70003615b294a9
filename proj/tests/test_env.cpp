#include <doctest.h>

#include <memory>
#include <random>

#include "cplan/env.hpp"
#include "cplan/errors.hpp"
#include "cplan/oracle.hpp"
#include "support.hpp"

using namespace cplan;

namespace {

std::shared_ptr<const EpisodeData> shared(EpisodeData ep) {
  return std::make_shared<const EpisodeData>(std::move(ep));
}

Action random_action(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {2.0 * u(rng) - 1.0, u(rng)};
}

}  // namespace

TEST_CASE("observation length and padding") {
  std::mt19937_64 rng(21);
  auto ep = shared(testing::random_episode(rng, 48));
  EnvConfig cfg;
  Environment env(ep, cfg);
  CHECK(env.reset().features.size() == 74);
  cfg.window_w = 6;
  CHECK(Environment(ep, cfg).reset().features.size() == 20);

  cfg.mode = ObservationMode::IP;
  Environment ip(ep, cfg);
  auto obs = ip.reset();
  for (double x : obs.curtailment_window) CHECK(x == 0.0);
  ip.step({});
  obs = ip.step({}).observation;  // t = 2: positions 4, 5 hold hours 0, 1
  CHECK(obs.curtailment_window[5] == ep->curtailment.total(1));
  CHECK(obs.curtailment_window[4] == ep->curtailment.total(0));
  CHECK(obs.curtailment_window[3] == 0.0);

  cfg.window_w = 49;
  CHECK_THROWS_AS(Environment(ep, cfg).reset(), ValidationError);
}

TEST_CASE("EP tail is zero padded") {
  std::mt19937_64 rng(22);
  auto ep = shared(testing::random_episode(rng, 30));
  Environment env(ep, EnvConfig{});
  auto obs = env.observe(20, 0.5);
  for (std::size_t k = 0; k < 24; ++k) {
    double want = 20 + k < 30 ? ep->curtailment.total(20 + k) : 0.0;
    CHECK(obs.curtailment_window[k] == want);
    CHECK(obs.prices_elec[k] == (20 + k < 30 ? ep->prices.electricity[20 + k] : 0.0));
  }
}

TEST_CASE("EP and IP agree except on the curtailment block") {
  std::mt19937_64 rng(23);
  auto ep = shared(testing::random_episode(rng, 72));
  EnvConfig ep_cfg, ip_cfg;
  ip_cfg.mode = ObservationMode::IP;
  Environment a(ep, ep_cfg), b(ep, ip_cfg);
  for (std::size_t t = 0; t < 72; t += 7) {
    auto oa = a.observe(t, 0.4), ob = b.observe(t, 0.4);
    for (std::size_t i = 0; i < 2 + 2 * 24; ++i) CHECK(oa.features[i] == ob.features[i]);
    for (std::size_t k = 0; k < 24; ++k) {
      double past = t + k >= 24 ? ep->curtailment.total(t + k - 24) : 0.0;
      double future = t + k < 72 ? ep->curtailment.total(t + k) : 0.0;
      CHECK(ob.curtailment_window[k] == past);
      CHECK(oa.curtailment_window[k] == future);
    }
  }
}

TEST_CASE("decode_action") {
  PlantConfig p;
  CHECK(decode_action({0.0, 0.0}, p) == Dispatch{});
  auto full = decode_action({1.0, 1.0}, p);
  CHECK(full.p_charge == doctest::Approx(450.0));
  CHECK(full.p_awe == 500.0);
  auto d = decode_action({-0.5, 0.19}, p);
  CHECK(d.p_discharge == doctest::Approx(225.0));
  CHECK(d.p_charge == 0.0);
  CHECK(d.p_awe == 0.0);
  CHECK_THROWS_AS(decode_action({std::nan(""), 0.0}, p), NumericalError);
  CHECK_THROWS_AS(decode_action({0.0, INFINITY}, p), NumericalError);
}

TEST_CASE("penalty branches") {
  PlantConfig p;
  CHECK(penalty({100.0, 0.0, 200.0}, 0.5, 1000.0, p) == 0.0);
  CHECK(penalty({200.0, 0.0, 0.0}, 0.95, 1000.0, p) == doctest::Approx(115.0));
  CHECK(penalty({0.0, 10.0, 0.0}, p.soc_min_fraction, 0.0, p) ==
        doctest::Approx(10.0 / p.eta_discharge));
  CHECK(penalty({100.0, 0.0, 150.0}, 0.5, 200.0, p) == doctest::Approx(50.0));
  auto flags = overaction_flags({200.0, 0.0, 0.0}, 0.95, 100.0, p);
  CHECK(flags.overcharge);
  CHECK(flags.awe_exceedance);
  CHECK_FALSE(flags.overdischarge);
}

TEST_CASE("filter_action examples") {
  PlantConfig p;
  Dispatch ok{100.0, 0.0, 200.0};
  CHECK(filter_action(ok, 0.5, 1000.0, p) == ok);
  auto f = filter_action({200.0, 0.0, 0.0}, 0.95, 5000.0, p);
  CHECK(f.p_charge == doctest::Approx(75.0 / 0.95).epsilon(1e-12));
  p.awe_power_max = 500.0;  // beta * max = 100
  auto g = filter_action({80.0, 0.0, 150.0}, 0.5, 100.0, p);
  CHECK(g.p_charge == 80.0);
  CHECK(g.p_awe == 0.0);
}

TEST_CASE("filtration is idempotent and sound") {
  PlantConfig p;
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    double soc = p.soc_min_fraction + (1.0 - p.soc_min_fraction) * u(rng);
    if (i % 10 == 0) soc = i % 20 ? 1.0 : p.soc_min_fraction;
    double avail = i % 7 == 0 ? 0.0 : 1200.0 * u(rng);
    auto raw = decode_action(random_action(rng), p);
    auto f = filter_action(raw, soc, avail, p);
    REQUIRE(penalty(f, soc, avail, p) == 0.0);
    REQUIRE(filter_action(f, soc, avail, p) == f);
    REQUIRE(f.p_charge + f.p_awe <= avail);
    REQUIRE((f.p_awe == 0.0 || f.p_awe >= p.awe_min_fraction * p.awe_power_max));
    auto next = step_soc({soc}, f, p).soc_fraction;
    REQUIRE(next >= p.soc_min_fraction);
    REQUIRE(next <= 1.0);
  }
}

TEST_CASE("reward") {
  PlantConfig p;
  EconomicConfig e;
  EnvConfig cfg;
  auto fixed = annualized_fixed_costs(p, e);
  CHECK(reward({}, 0.0, 100.0, 6.0, p, e, cfg, 168) == doctest::Approx(-fixed.total() / 168));
  double base = reward({0.0, 50.0, 200.0}, 0.0, 100.0, 6.0, p, e, cfg, 168);
  auto he = hour_economics({0.0, 50.0, 200.0}, 100.0, 6.0, e, p);
  CHECK(base == doctest::Approx(he.revenue - he.vom - fixed.total() / 168).epsilon(1e-14));
  CHECK(base - reward({0.0, 50.0, 200.0}, 115.0, 100.0, 6.0, p, e, cfg, 168) ==
        doctest::Approx(11500.0));
}

TEST_CASE("zero rollout returns minus fixed costs") {
  std::mt19937_64 rng(25);
  auto ep = shared(testing::random_episode(rng, 48));
  Environment env(ep, EnvConfig{});
  env.reset();
  double ret = 0.0;
  StepResult r;
  while (!env.done()) {
    r = env.step({});
    ret += r.reward;
  }
  CHECK(r.done);
  CHECK(env.soc() == ep->plant.soc_initial_fraction);
  CHECK(ret == doctest::Approx(-env.fixed_costs().total()).epsilon(1e-12));
  CHECK_THROWS_AS(env.step({}), ValidationError);
}

TEST_CASE("random rollouts stay feasible and the reward identity holds") {
  std::mt19937_64 rng(26);
  auto ep = shared(testing::random_episode(rng, 96));
  EnvConfig cfg;
  Environment env(ep, cfg);
  for (int episode = 0; episode < 50; ++episode) {
    env.reset();
    double ret = 0.0, pen = 0.0;
    std::vector<Dispatch> applied;
    while (!env.done()) {
      std::size_t t = env.t();
      auto r = env.step(random_action(rng));
      double used = r.dispatch_applied.p_charge + r.dispatch_applied.p_awe;
      REQUIRE(used <= ep->curtailment.total(t));
      REQUIRE(r.record.soc_after >= ep->plant.soc_min_fraction);
      REQUIRE(r.record.soc_after <= 1.0);
      ret += r.reward;
      pen += r.penalty_raw * cfg.penalty_factor;
      applied.push_back(r.dispatch_applied);
    }
    double obj = objective(replay(*ep, applied), ep->plant, ep->econ);
    CHECK(std::abs(ret + pen - obj) <= 1e-9 * std::max(1.0, std::abs(obj)));
  }
}

TEST_CASE("determinism") {
  std::mt19937_64 rng(27);
  auto ep = shared(testing::random_episode(rng, 48));
  std::vector<Action> actions;
  for (int i = 0; i < 48; ++i) actions.push_back(random_action(rng));
  auto run = [&] {
    Environment env(ep, EnvConfig{});
    std::vector<double> out;
    env.reset(9);
    for (const auto& a : actions) {
      auto r = env.step(a);
      out.push_back(r.reward);
      out.push_back(r.record.soc_after);
      out.insert(out.end(), r.observation.features.begin(), r.observation.features.end());
    }
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("forecast feeds the EP window only") {
  std::mt19937_64 rng(28);
  auto ep = shared(testing::random_episode(rng, 30));
  std::vector<double> forecast(30, 0.0);
  Environment truth(ep, EnvConfig{}), blind(ep, EnvConfig{}, forecast);
  auto a = truth.reset(), b = blind.reset();
  for (double x : b.curtailment_window) CHECK(x == 0.0);
  auto ra = truth.step({1.0, 1.0}), rb = blind.step({1.0, 1.0});
  CHECK(ra.dispatch_applied == rb.dispatch_applied);
  CHECK_THROWS_AS(Environment(ep, EnvConfig{}, std::vector<double>(3, 0.0)), ValidationError);
  (void)a;
}

TEST_CASE("greedy hand policy on a 3-hour instance matches brute force") {
  EpisodeData ep;
  ep.curtailment = testing::flat_series(3, 0.0, 0.0);
  ep.curtailment.solar = {900.0, 0.0, 0.0};
  ep.prices.electricity = {20.0, 30.0, 300.0};
  ep.econ = testing::zero_costs();
  ep.econ.capex_bess = 1e4;
  // Full-power charge moves SOC by 0.285 = 19 steps of the K = 61 grid, so
  // the greedy plan lies on the oracle lattice.
  EnvConfig cfg;
  cfg.window_w = 3;
  Environment env(shared(ep), cfg);
  env.reset();
  double ret = 0.0;
  for (Action a : {Action{1.0, 0.75}, Action{0.0, 0.0}, Action{-1.0, 0.0}}) {
    auto s = env.step(a);
    CHECK(s.penalty_raw == (a.bess < 0 ? doctest::Approx(450.0 / 0.95 - 427.5) : doctest::Approx(0.0)));
    ret += s.reward + s.penalty_raw * 100.0;
  }
  auto best = brute_force(ep, {SocGrid::uniform(0.1, 61), 5});
  CHECK(ret == doctest::Approx(best.profit).epsilon(1e-9));
}

TEST_CASE("trace format round trip") {
  std::vector<TraceRow> rows{{0, 0.5, 1.0, 0.0, 100.0, 2100.21, 250.0, -3.5, 0.0},
                             {1, 0.25, 0.0, 2.0, 0.0, 0.0, 160.0, 12.0, 1.5}};
  auto text = format_trace(rows);
  CHECK(text.rfind("t,soc,p_ch,p_dh,p_awe,h2_kg,price,reward,penalty\n", 0) == 0);
  auto back = parse_trace(text);
  REQUIRE(back.size() == 2);
  CHECK(back[1].penalty == 1.5);
  CHECK(format_trace(back) == text);
}
