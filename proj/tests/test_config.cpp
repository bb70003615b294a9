#include <doctest.h>

#include <cmath>

#include "cplan/config.hpp"
#include "cplan/errors.hpp"

using namespace cplan;
namespace fs = std::filesystem;

TEST_CASE("empty config yields defaults") {
  auto cfg = parse_config("", "/base");
  CHECK(cfg.plant == PlantConfig{});
  CHECK(cfg.econ == EconomicConfig{});
  CHECK(cfg.env == EnvConfig{});
  CHECK(cfg.train.learning_rate == 3e-5);
  CHECK(cfg.train.train_batch_size == 8000);
  CHECK(cfg.train.hidden_width == 256);
  CHECK(cfg.train.hidden_layers == 3);
  CHECK(std::isnan(cfg.train.target_profit));
  CHECK(cfg.eval.samples_per_cell == 2000);
  CHECK(cfg.eval.histogram_bins == 50);
  CHECK(cfg.oracle.grid_levels == 101);
  CHECK(cfg.oracle.action_levels == 21);
  CHECK(cfg.data.hydrogen_price == 6.0);
}

TEST_CASE("keys mirror field names") {
  auto cfg = parse_config(R"([run]
seed = 42
workers = 2
[data]
curtailment = series/week.csv
prices = /abs/tou.csv
[plant]
bess_capacity = 900
soc_initial_fraction = 0.5
[economics]
capex_bess = 1e6
crf_form = annuity
lifetime_years = 20
[env]
mode = IP
window_w = 6
filtration_enabled = false
[train]
learning_rate = 1e-4
total_steps = 16000
[eval]
model = uniform-episode
)",
                          "/cfgdir");
  CHECK(cfg.seed == 42);
  CHECK(cfg.train.seed == 42);
  CHECK(cfg.train.workers == 2);
  CHECK(cfg.data.curtailment == fs::path("/cfgdir/series/week.csv"));
  CHECK(cfg.data.prices == fs::path("/abs/tou.csv"));
  CHECK(cfg.plant.bess_capacity == 900.0);
  CHECK(cfg.plant.soc_initial_fraction == 0.5);
  CHECK(cfg.econ.capex_bess == 1e6);
  CHECK(cfg.econ.crf_form == CrfForm::Annuity);
  CHECK(cfg.econ.lifetime_years == 20);
  CHECK(cfg.env.mode == ObservationMode::IP);
  CHECK(cfg.env.window_w == 6);
  CHECK_FALSE(cfg.env.filtration_enabled);
  CHECK(cfg.train.learning_rate == 1e-4);
  CHECK(cfg.train.total_steps == 16000);
  CHECK(cfg.eval.model == UncertaintyModel::UniformEpisode);
}

TEST_CASE("format_config round trips") {
  auto cfg = parse_config("[plant]\neta_awe = 0.65\n[train]\ntarget_profit = 123.5\n", "/x");
  cfg.data.curtailment = "/data/a.csv";
  auto text = format_config(cfg);
  auto back = parse_config(text, "/elsewhere");
  CHECK(format_config(back) == text);
  CHECK(back.plant.eta_awe == 0.65);
  CHECK(back.train.target_profit == 123.5);
  CHECK(back.data.curtailment == fs::path("/data/a.csv"));
  CHECK(text.find("[train]\nlearning_rate") != std::string::npos);
  CHECK(text.find("\nseed = 0\n") != std::string::npos);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("[plant]\nbess_capacty = 5\n", "/"), ValidationError);
  CHECK_THROWS_AS(parse_config("[plants]\nbess_capacity = 5\n", "/"), ValidationError);
  CHECK_THROWS_AS(parse_config("[train]\nseed = 3\n", "/"), ValidationError);
  CHECK_THROWS_AS(parse_config("[plant]\nbess_capacity = lots\n", "/"), FormatError);
  CHECK_THROWS_AS(parse_config("[train]\nepochs_per_batch = 2.5\n", "/"), FormatError);
  CHECK_THROWS_AS(parse_config("[env]\nfiltration_enabled = maybe\n", "/"), FormatError);
  CHECK_THROWS_AS(parse_config("[env]\nmode = XP\n", "/"), ValidationError);
  CHECK_THROWS_AS(parse_config("[plant]\neta_charge = 1.5\n", "/"), ValidationError);
  CHECK_THROWS_AS(parse_config("[eval]\nuncertainty = 1\n", "/"), ValidationError);
  CHECK_THROWS_AS(parse_config("[run\n", "/"), FormatError);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.ini"), IoError);
}

TEST_CASE("shipped configs load") {
  const fs::path root = CPLAN_SOURCE_DIR;
  for (const char* name : {"default.ini", "toy_week.ini"}) {
    CAPTURE(name);
    auto cfg = load_config(root / "config" / name);
    auto ep = load_episode(cfg);
    CHECK(ep.horizon() > 0);
    CHECK(ep.prices.electricity.size() == ep.horizon());
  }
  auto def = load_config(root / "config" / "default.ini");
  CHECK(def.plant == PlantConfig{});
  CHECK(def.econ == EconomicConfig{});
  CHECK(def.env == EnvConfig{});
}
