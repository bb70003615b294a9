#include <doctest.h>

#include <filesystem>
#include <random>

#include "cplan/data_model.hpp"
#include "cplan/errors.hpp"
#include "support.hpp"

using namespace cplan;

namespace {

std::vector<QuarterRecord> quarters(std::size_t hours, EpochMinutes start,
                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 50.0);
  std::vector<QuarterRecord> out;
  for (std::size_t i = 0; i < 4 * hours; ++i)
    out.push_back({start + 15 * static_cast<EpochMinutes>(i), u(rng), u(rng)});
  return out;
}

}  // namespace

TEST_CASE("iso8601 parse and format") {
  auto t = parse_iso8601("2020-01-01T00:00:00Z");
  CHECK(t == 26297280);
  CHECK(format_iso8601(t) == "2020-01-01T00:00:00Z");
  CHECK(parse_iso8601("2020-01-01 01:30") == t + 90);
  CHECK(parse_iso8601("2020-01-01T02:00+02:00") == t);
  CHECK(parse_iso8601("2020-03-01T00:00Z") - t == 60 * 24 * 60);  // leap day
  CHECK_THROWS_AS(parse_iso8601("2020-01-01T00:00:30Z"), FormatError);
  CHECK_THROWS_AS(parse_iso8601("yesterday"), FormatError);
}

TEST_CASE("ingest sums quarters into hours") {
  EpochMinutes t0 = parse_iso8601("2021-05-01T00:00Z");
  std::vector<QuarterRecord> r{{t0, 10, 0}, {t0 + 15, 20, 0}, {t0 + 30, 30, 0}, {t0 + 45, 40, 0},
                               {t0 + 60, 0, 0}, {t0 + 75, 0, 0}, {t0 + 90, 0, 0}, {t0 + 105, 0, 0}};
  auto s = ingest_curtailment(r);
  REQUIRE(s.size() == 2);
  CHECK(s.start_timestamp == t0);
  CHECK(s.wind[0] == 100.0);
  CHECK(s.total(1) == 0.0);
}

TEST_CASE("ingest of a leap year yields 8784 hours") {
  std::mt19937_64 rng(1);
  auto r = quarters(8784, parse_iso8601("2020-01-01T00:00Z"), rng);
  CHECK(r.size() == 35136);
  auto s = ingest_curtailment(r);
  CHECK(s.size() == 8784);
  CHECK(validate(s).empty());
}

TEST_CASE("ingest errors") {
  EpochMinutes t0 = parse_iso8601("2021-05-01T00:00Z");
  std::mt19937_64 rng(2);
  auto good = quarters(3, t0, rng);

  SUBCASE("missing quarter names the hour") {
    auto r = good;
    r.erase(r.begin() + 5);
    try {
      ingest_curtailment(r);
      FAIL("expected a gap error");
    } catch (const GapError& e) {
      CHECK(e.hour() == "2021-05-01T01:00:00Z");
    }
  }
  SUBCASE("trailing partial hour") {
    auto r = good;
    r.pop_back();
    CHECK_THROWS_AS(ingest_curtailment(r), GapError);
  }
  SUBCASE("negative value") {
    auto r = good;
    r[3].solar = -1.0;
    CHECK_THROWS_AS(ingest_curtailment(r), ValidationError);
  }
  SUBCASE("off-grid timestamp") {
    auto r = good;
    r[2].timestamp += 1;
    CHECK_THROWS_AS(ingest_curtailment(r), FormatError);
  }
  SUBCASE("out of order") {
    auto r = good;
    std::swap(r[1], r[2]);
    CHECK_THROWS_AS(ingest_curtailment(r), FormatError);
  }
  SUBCASE("empty csv") { CHECK_THROWS_AS(parse_quarter_records(""), FormatError); }
}

TEST_CASE("ingest is linear") {
  std::mt19937_64 rng(3);
  EpochMinutes t0 = parse_iso8601("2021-01-01T00:00Z");
  for (int trial = 0; trial < 50; ++trial) {
    auto a = quarters(12, t0, rng);
    auto b = quarters(12, t0, rng);
    auto sum = a;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i].wind += b[i].wind;
      sum[i].solar += b[i].solar;
    }
    auto sa = ingest_curtailment(a), sb = ingest_curtailment(b), ss = ingest_curtailment(sum);
    for (std::size_t t = 0; t < ss.size(); ++t) {
      CHECK(sa.wind[t] + sb.wind[t] == doctest::Approx(ss.wind[t]).epsilon(1e-12));
      CHECK(sa.solar[t] + sb.solar[t] == doctest::Approx(ss.solar[t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("hourly csv round trip") {
  std::mt19937_64 rng(4);
  auto s = ingest_curtailment(quarters(30, parse_iso8601("2021-02-01T00:00Z"), rng));
  auto text = format_hourly_series(s);
  CHECK(parse_hourly_series(text) == s);
  CHECK(format_hourly_series(parse_hourly_series(text)) == text);
}

TEST_CASE("load_prices tiles and truncates") {
  std::string day = "hour,price_usd_per_mwh\n";
  for (int h = 0; h < 24; ++h) day += std::to_string(h) + "," + std::to_string(10 * h) + "\n";
  auto p48 = parse_prices(day, 48, 6.0);
  REQUIRE(p48.electricity.size() == 48);
  CHECK(p48.hydrogen == 6.0);
  for (int t = 0; t < 48; ++t) CHECK(p48.electricity[t] == 10.0 * (t % 24));

  std::string two = "hour,price_usd_per_mwh\n";
  for (int h = 0; h < 48; ++h) two += std::to_string(h) + "," + std::to_string(h) + ".5\n";
  auto p24 = parse_prices(two, 24, 6.0);
  REQUIRE(p24.electricity.size() == 24);
  CHECK(p24.electricity[23] == 23.5);

  CHECK_THROWS_AS(parse_prices("", 24, 6.0), FormatError);
  CHECK_THROWS_AS(parse_prices("hour,price_usd_per_mwh\n0,abc\n", 24, 6.0), FormatError);
  std::string neg = day;
  neg.replace(neg.find("\n5,50"), 5, "\n5,-50");
  CHECK_THROWS_AS(parse_prices(neg, 24, 6.0), ValidationError);
}

TEST_CASE("validate reports violations") {
  std::mt19937_64 rng(5);
  auto ep = testing::random_episode(rng, 24);
  CHECK(validate(ep).empty());

  auto bad = ep;
  bad.plant.soc_min_fraction = 1.2;
  auto v = validate(bad);
  REQUIRE(!v.empty());
  bool named = false;
  for (const auto& s : v) named = named || s.find("soc_min_fraction") != std::string::npos;
  CHECK(named);

  bad = ep;
  bad.curtailment.wind.resize(10);
  bad.curtailment.solar.resize(9);
  v = validate(bad);
  bool mismatch = false;
  for (const auto& s : v) mismatch = mismatch || s.find("length mismatch") != std::string::npos;
  CHECK(mismatch);
  CHECK_THROWS_AS(require_valid(bad), ValidationError);
}

TEST_CASE("randomized violation injection") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  // Each injector breaks exactly one invariant; validate must notice.
  std::vector<std::function<void(EpisodeData&, double)>> injectors{
      [](EpisodeData& e, double x) { e.plant.bess_capacity = -std::abs(x); },
      [](EpisodeData& e, double x) { e.plant.soc_min_fraction = 1.0 + std::abs(x); },
      [](EpisodeData& e, double x) { e.plant.soc_initial_fraction = e.plant.soc_min_fraction - 0.01 - std::abs(x) / 10; },
      [](EpisodeData& e, double x) { e.plant.eta_charge = 1.0 + std::abs(x); },
      [](EpisodeData& e, double x) { e.plant.eta_discharge = -std::abs(x); },
      [](EpisodeData& e, double x) { e.plant.eta_awe = 0.0 * x; },
      [](EpisodeData& e, double x) { e.plant.bess_power_fraction = 1.0 + std::abs(x); },
      [](EpisodeData& e, double x) { e.plant.awe_min_fraction = 1.0 + std::abs(x); },
      [](EpisodeData& e, double x) { e.plant.lhv = -std::abs(x); },
      [](EpisodeData& e, double x) { e.econ.inflation_rate = -std::abs(x); },
      [](EpisodeData& e, double) { e.econ.lifetime_years = 0; },
      [](EpisodeData& e, double x) { e.econ.vom_awe = -0.1 - std::abs(x); },
      [](EpisodeData& e, double x) { e.curtailment.wind[3] = -0.1 - std::abs(x); },
      [](EpisodeData& e, double) { e.curtailment.solar.pop_back(); },
      [](EpisodeData& e, double x) { e.prices.electricity[1] = -0.1 - std::abs(x); },
      [](EpisodeData& e, double) { e.prices.electricity.push_back(1.0); },
      [](EpisodeData& e, double x) { e.prices.hydrogen = -0.1 - std::abs(x); },
  };
  for (int trial = 0; trial < 500; ++trial) {
    auto ep = testing::random_episode(rng, 8);
    REQUIRE(validate(ep).empty());
    auto& inject = injectors[static_cast<std::size_t>(trial) % injectors.size()];
    inject(ep, u(rng));
    CHECK_FALSE(validate(ep).empty());
  }
}

TEST_CASE("json round trip is bit exact") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto ep = testing::random_episode(rng, 48);
    ep.econ.crf_form = trial % 2 ? CrfForm::Annuity : CrfForm::SinkingFund;
    auto text = to_json(ep).dump();
    auto back = episode_from_json(nlohmann::json::parse(text));
    CHECK(back == ep);
  }
}

TEST_CASE("format_double is shortest round trip") {
  for (double x : {0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5})
    CHECK(parse_double(format_double(x), "x") == x);
  CHECK(format_double(100.0) == "100");
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("file io errors") {
  CHECK_THROWS_AS(read_text_file("/nonexistent/dir/file.csv"), IoError);
  auto dir = std::filesystem::temp_directory_path() / "cplan_io_test";
  write_text_file(dir / "nested" / "f.txt", "hello");
  CHECK(read_text_file(dir / "nested" / "f.txt") == "hello");
  std::filesystem::remove_all(dir);
}
