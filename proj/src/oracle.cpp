#include "cplan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cplan/errors.hpp"

namespace cplan {

SocGrid SocGrid::uniform(double soc_min, int levels) {
  if (levels < 2) throw ValidationError("SOC grid needs at least 2 levels");
  SocGrid g;
  g.values.resize(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) {
    // fraction first, so nested grids share bit-identical levels
    double frac = static_cast<double>(k) / static_cast<double>(levels - 1);
    g.values[static_cast<std::size_t>(k)] = soc_min + (1.0 - soc_min) * frac;
  }
  g.values.front() = soc_min;
  g.values.back() = 1.0;
  return g;
}

int SocGrid::index_of(double soc) const {
  for (std::size_t k = 0; k < values.size(); ++k)
    if (std::abs(values[k] - soc) <= 1e-12) return static_cast<int>(k);
  return -1;
}

std::vector<double> awe_levels(const PlantConfig& plant, int action_levels) {
  if (action_levels < 2) throw ValidationError("action_levels must be >= 2");
  std::vector<double> out;
  for (int j = 0; j < action_levels; ++j) {
    double frac = static_cast<double>(j) / (action_levels - 1);
    double p = frac < plant.awe_min_fraction ? 0.0 : frac * plant.awe_power_max;
    if (out.empty() || out.back() != p) out.push_back(p);
  }
  return out;
}

namespace {

struct Move {
  int to = 0;
  double p_charge = 0.0;
  double p_discharge = 0.0;
};

// Shared lattice: per level, the battery moves in a fixed order (ascending
// destination), plus the electrolyzer levels. dp_solve and brute_force both
// walk choices in this order and keep the first strict maximum.
struct Lattice {
  std::vector<std::vector<Move>> moves;
  std::vector<double> awe;
  int start = 0;

  Lattice(const EpisodeData& ep, const Discretization& disc) {
    const auto& plant = ep.plant;
    const auto& v = disc.grid.values;
    if (disc.grid.levels() < 2) throw ValidationError("SOC grid needs at least 2 levels");
    if (std::abs(v.front() - plant.soc_min_fraction) > 1e-12 || v.back() != 1.0)
      throw ValidationError("SOC grid must span [soc_min_fraction, 1]");
    start = disc.grid.index_of(plant.soc_initial_fraction);
    if (start < 0)
      throw ValidationError("soc_initial_fraction " + format_double(plant.soc_initial_fraction) +
                            " is not a level of the SOC grid");
    awe = awe_levels(plant, disc.action_levels);
    double limit = bess_power_limit(plant) * (1.0 + 1e-12);
    double cap = plant.bess_capacity;
    moves.resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
      for (std::size_t to = 0; to < v.size(); ++to) {
        Move m;
        m.to = static_cast<int>(to);
        if (to > k) {
          m.p_charge = (v[to] - v[k]) * cap / plant.eta_charge;
          if (m.p_charge > limit) continue;
        } else if (to < k) {
          m.p_discharge = (v[k] - v[to]) * cap * plant.eta_discharge;
          if (m.p_discharge > limit) continue;
        }
        moves[k].push_back(m);
      }
    }
  }

  std::size_t choices_per_level() const {
    std::size_t n = 0;
    for (const auto& m : moves) n += m.size();
    return n * awe.size();
  }
};

double hour_value(const EpisodeData& ep, std::size_t t, const Dispatch& d) {
  auto e = hour_economics(d, ep.prices.electricity[t], ep.prices.hydrogen, ep.econ, ep.plant);
  return e.revenue - e.vom;
}

bool feasible(const Dispatch& d, double available) {
  return d.p_charge + d.p_awe <= available;
}

PlanResult finish(const EpisodeData& ep, const SocGrid& grid, std::vector<Dispatch> plan,
                  const std::vector<int>& levels) {
  PlanResult out;
  out.soc_path.reserve(levels.size());
  for (int k : levels) out.soc_path.push_back(grid.values[static_cast<std::size_t>(k)]);
  auto records = replay(ep, plan);
  out.profit = objective(records, ep.plant, ep.econ);
  out.dispatch_sequence = std::move(plan);
  return out;
}

}  // namespace

PlanResult dp_solve(const EpisodeData& ep, const Discretization& disc, DpOptions options) {
  require_valid(ep);
  Lattice lat(ep, disc);
  const std::size_t T = ep.horizon();
  const std::size_t K = disc.grid.values.size();
  double evaluations = static_cast<double>(T) * static_cast<double>(lat.choices_per_level());
  if (evaluations > options.max_evaluations)
    throw ValidationError("dp_solve budget exceeded: " + format_double(evaluations) +
                          " evaluations > " + format_double(options.max_evaluations));
  auto totals = ep.curtailment.totals();

  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> next(K, 0.0), cur(K, kNone);
  // Packed (move index, awe index) per (t, k).
  std::vector<std::uint32_t> choice(T * K, 0);

  for (std::size_t t = T; t-- > 0;) {
    const double avail = totals[t];
    for (std::size_t k = 0; k < K; ++k) {
      double best = kNone;
      std::uint32_t best_choice = 0;
      const auto& mv = lat.moves[k];
      for (std::size_t i = 0; i < mv.size(); ++i) {
        for (std::size_t j = 0; j < lat.awe.size(); ++j) {
          Dispatch d{mv[i].p_charge, mv[i].p_discharge, lat.awe[j]};
          if (!feasible(d, avail)) continue;
          double value = hour_value(ep, t, d) + next[static_cast<std::size_t>(mv[i].to)];
          if (value > best) {
            best = value;
            best_choice = static_cast<std::uint32_t>(i * lat.awe.size() + j);
          }
        }
      }
      cur[k] = best;
      choice[t * K + k] = best_choice;
    }
    std::swap(cur, next);
  }

  std::vector<Dispatch> plan;
  std::vector<int> levels{lat.start};
  plan.reserve(T);
  int k = lat.start;
  for (std::size_t t = 0; t < T; ++t) {
    auto c = choice[t * K + static_cast<std::size_t>(k)];
    const auto& m = lat.moves[static_cast<std::size_t>(k)][c / lat.awe.size()];
    plan.push_back({m.p_charge, m.p_discharge, lat.awe[c % lat.awe.size()]});
    k = m.to;
    levels.push_back(k);
  }
  return finish(ep, disc.grid, std::move(plan), levels);
}

PlanResult brute_force(const EpisodeData& ep, const Discretization& disc) {
  require_valid(ep);
  const std::size_t T = ep.horizon();
  if (T > 5) throw ValidationError("brute_force supports T <= 5, got " + std::to_string(T));
  Lattice lat(ep, disc);
  auto totals = ep.curtailment.totals();

  struct Choice {
    Dispatch d;
    int to;
  };
  std::vector<Choice> path(T);
  std::vector<Choice> best_path;
  double best = -std::numeric_limits<double>::infinity();

  auto total_of = [&](const std::vector<Choice>& p) {
    double acc = 0.0;
    for (std::size_t t = T; t-- > 0;) acc = hour_value(ep, t, p[t].d) + acc;
    return acc;
  };

  auto recurse = [&](auto&& self, std::size_t t, int k) -> void {
    if (t == T) {
      double v = total_of(path);
      if (v > best) {
        best = v;
        best_path = path;
      }
      return;
    }
    for (const auto& m : lat.moves[static_cast<std::size_t>(k)]) {
      for (double awe : lat.awe) {
        Dispatch d{m.p_charge, m.p_discharge, awe};
        if (!feasible(d, totals[t])) continue;
        path[t] = {d, m.to};
        self(self, t + 1, m.to);
      }
    }
  };
  recurse(recurse, 0, lat.start);

  std::vector<Dispatch> plan;
  std::vector<int> levels{lat.start};
  for (const auto& c : best_path) {
    plan.push_back(c.d);
    levels.push_back(c.to);
  }
  return finish(ep, disc.grid, std::move(plan), levels);
}

double relaxation_upper_bound(const EpisodeData& ep) {
  const auto& plant = ep.plant;
  const auto& econ = ep.econ;
  const auto& prices = ep.prices.electricity;
  double max_price = prices.empty() ? 0.0 : *std::max_element(prices.begin(), prices.end());
  double per_mwh_bess = plant.eta_charge * plant.eta_discharge * (max_price - econ.vom_bess);
  double per_mwh_awe = plant.eta_awe / plant.lhv * (ep.prices.hydrogen - econ.vom_awe);
  double per_mwh = std::max({0.0, per_mwh_bess, per_mwh_awe});
  double hourly_cap = bess_power_limit(plant) + plant.awe_power_max;
  double bound = (plant.soc_initial_fraction - plant.soc_min_fraction) * plant.bess_capacity *
                 plant.eta_discharge * std::max(0.0, max_price - econ.vom_bess);
  for (std::size_t t = 0; t < ep.horizon(); ++t)
    bound += std::min(ep.curtailment.total(t), hourly_cap) * per_mwh;
  return bound - annualized_fixed_costs(plant, econ).total();
}

std::string format_plan(const EpisodeData& ep, const PlanResult& plan) {
  (void)ep;
  std::string out = "t,soc,p_ch,p_dh,p_awe\n";
  for (std::size_t t = 0; t < plan.dispatch_sequence.size(); ++t) {
    const auto& d = plan.dispatch_sequence[t];
    out += std::to_string(t) + ',' + format_double(plan.soc_path[t + 1]) + ',' +
           format_double(d.p_charge) + ',' + format_double(d.p_discharge) + ',' +
           format_double(d.p_awe) + '\n';
  }
  return out;
}

}  // namespace cplan
