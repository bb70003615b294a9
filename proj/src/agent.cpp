#include "cplan/agent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "cplan/errors.hpp"

namespace cplan {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2 pi) / 2
constexpr double kLog2 = 0.69314718055994530942;

// log(1 - tanh(u)^2), stable for large |u|.
double log1m_tanh2(double u) {
  double a = std::abs(u);
  return 2.0 * (kLog2 - a - std::log1p(std::exp(-2.0 * a)));
}

// log |d action / d u| summed over both components.
double squash_log_jacobian(double u0, double u1) {
  return log1m_tanh2(u0) + (log1m_tanh2(u1) - kLog2);
}

}  // namespace

std::vector<std::string> validate(const TrainConfig& c) {
  std::vector<std::string> v;
  auto need = [&](bool ok, const char* msg) {
    if (!ok) v.emplace_back(msg);
  };
  need(c.learning_rate > 0.0, "learning_rate must be > 0");
  need(c.train_batch_size > 0, "train_batch_size must be > 0");
  need(c.minibatch_size > 0, "minibatch_size must be > 0");
  need(c.epochs_per_batch >= 0, "epochs_per_batch must be >= 0");
  need(c.clip_epsilon > 0.0 && c.clip_epsilon < 1.0, "clip_epsilon must lie in (0, 1)");
  need(c.gamma > 0.0 && c.gamma <= 1.0, "gamma must lie in (0, 1]");
  need(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0, "gae_lambda must lie in [0, 1]");
  need(c.entropy_coefficient >= 0.0, "entropy_coefficient must be >= 0");
  need(c.value_coefficient >= 0.0, "value_coefficient must be >= 0");
  need(c.total_steps >= 0, "total_steps must be >= 0");
  need(c.num_envs >= 1, "num_envs must be >= 1");
  need(c.workers >= 1, "workers must be >= 1");
  need(c.hidden_width >= 1, "hidden_width must be >= 1");
  need(c.hidden_layers >= 1, "hidden_layers must be >= 1");
  need(c.reward_scale > 0.0, "reward_scale must be > 0");
  need(c.max_grad_norm >= 0.0, "max_grad_norm must be >= 0");
  need(c.initial_log_std >= kLogStdMin && c.initial_log_std <= kLogStdMax,
       "initial_log_std must lie in [-20, 2]");
  return v;
}

PolicyParams make_policy(int obs_dim, const TrainConfig& cfg, std::mt19937_64& rng) {
  PolicyParams p;
  p.net = Mlp::trunk(obs_dim, cfg.hidden_width, cfg.hidden_layers, 2);
  p.net.init_orthogonal(rng, 0.01);
  p.log_std = Eigen::VectorXd::Constant(2, cfg.initial_log_std);
  return p;
}

ValueParams make_value(int obs_dim, const TrainConfig& cfg, std::mt19937_64& rng) {
  ValueParams v;
  v.net = Mlp::trunk(obs_dim, cfg.hidden_width, cfg.hidden_layers, 1);
  v.net.init_orthogonal(rng, 1.0);
  return v;
}

PolicyOutput policy_forward(const PolicyParams& params, const Eigen::VectorXd& obs) {
  PolicyOutput out;
  out.mean = params.net.forward_one(obs);
  out.log_std = params.effective_log_std();
  return out;
}

Action squash(const Eigen::Vector2d& u) {
  return {std::tanh(u(0)), 0.5 * (std::tanh(u(1)) + 1.0)};
}

Eigen::Vector2d unsquash(const Action& a) {
  return {std::atanh(a.bess), std::atanh(2.0 * a.awe - 1.0)};
}

double squashed_log_prob(const Eigen::Vector2d& u, const Eigen::Vector2d& mean,
                         const Eigen::Vector2d& log_std) {
  double lp = 0.0;
  for (int i = 0; i < 2; ++i) {
    double z = (u(i) - mean(i)) / std::exp(log_std(i));
    lp += -0.5 * z * z - log_std(i) - kHalfLog2Pi;
  }
  return lp - squash_log_jacobian(u(0), u(1));
}

ActionSample sample_action(const Eigen::Vector2d& mean, const Eigen::Vector2d& log_std,
                           std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ActionSample s;
  for (int i = 0; i < 2; ++i) s.pre_squash(i) = mean(i) + std::exp(log_std(i)) * normal(rng);
  s.action = squash(s.pre_squash);
  s.log_prob = squashed_log_prob(s.pre_squash, mean, log_std);
  return s;
}

Action mean_action(const PolicyParams& params, const Eigen::VectorXd& obs) {
  return squash(params.net.forward_one(obs));
}

GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double bootstrap, double gamma,
              double lambda) {
  if (values.size() != rewards.size() || dones.size() != rewards.size())
    throw ValidationError("gae: rewards, values and dones must have equal lengths");
  GaeResult out;
  const std::size_t n = rewards.size();
  out.advantages.resize(n);
  out.returns.resize(n);
  double next_adv = 0.0, next_value = bootstrap;
  for (std::size_t t = n; t-- > 0;) {
    double live = dones[t] ? 0.0 : 1.0;
    double delta = rewards[t] + gamma * next_value * live - values[t];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[t] = next_adv;
    out.returns[t] = next_adv + values[t];
    next_value = values[t];
  }
  return out;
}

void normalize_advantages(RolloutBatch& batch) {
  auto& a = batch.advantages;
  if (a.size() == 0) return;
  double mean = a.mean();
  double var = (a.array() - mean).square().mean();
  a = (a.array() - mean) / (std::sqrt(var) + 1e-8);
}

LossTerms ppo_loss(const PolicyParams& policy, const ValueParams& value,
                   const RolloutBatch& batch, std::span<const Eigen::Index> idx,
                   const TrainConfig& cfg, PpoGradients* grad) {
  const auto B = static_cast<Eigen::Index>(idx.size());
  if (B == 0) throw ValidationError("ppo_loss: empty minibatch");
  const Eigen::Index dim = batch.observations.rows();
  Eigen::MatrixXd X(dim, B), U(2, B);
  Eigen::VectorXd old_lp(B), adv(B), ret(B);
  for (Eigen::Index j = 0; j < B; ++j) {
    auto c = idx[static_cast<std::size_t>(j)];
    X.col(j) = batch.observations.col(c);
    U.col(j) = batch.pre_squash.col(c);
    old_lp(j) = batch.log_probs(c);
    adv(j) = batch.advantages(c);
    ret(j) = batch.returns(c);
  }

  Mlp::Cache pc, vc;
  Eigen::MatrixXd mu = policy.net.forward(X, pc);
  Eigen::MatrixXd V = value.net.forward(X, vc);
  Eigen::Vector2d ls = policy.effective_log_std();
  Eigen::Vector2d sigma = ls.array().exp();

  Eigen::MatrixXd Z(2, B);
  for (int i = 0; i < 2; ++i) Z.row(i) = (U.row(i) - mu.row(i)) / sigma(i);

  const double eps = cfg.clip_epsilon;
  const double inv_b = 1.0 / static_cast<double>(B);
  LossTerms out;
  Eigen::VectorXd g_lp = Eigen::VectorXd::Zero(B);
  for (Eigen::Index j = 0; j < B; ++j) {
    double lp = -squash_log_jacobian(U(0, j), U(1, j));
    for (int i = 0; i < 2; ++i) lp += -0.5 * Z(i, j) * Z(i, j) - ls(i) - kHalfLog2Pi;
    double rho = std::exp(lp - old_lp(j));
    double unclipped = rho * adv(j);
    double clipped = std::clamp(rho, 1.0 - eps, 1.0 + eps) * adv(j);
    out.policy -= std::min(unclipped, clipped) * inv_b;
    if (unclipped <= clipped) g_lp(j) = -unclipped * inv_b;
    out.approx_kl += (old_lp(j) - lp) * inv_b;
    if (std::abs(rho - 1.0) > eps) out.clip_fraction += inv_b;
  }
  Eigen::VectorXd dv = V.row(0).transpose() - ret;
  out.value = dv.squaredNorm() * inv_b;
  out.entropy = ls.sum() + 2.0 * (0.5 + kHalfLog2Pi);
  out.total = out.policy + cfg.value_coefficient * out.value -
              cfg.entropy_coefficient * out.entropy;

  if (grad) {
    Eigen::MatrixXd d_mu(2, B);
    for (int i = 0; i < 2; ++i)
      d_mu.row(i) = (g_lp.transpose().array() * Z.row(i).array() / sigma(i)).matrix();
    grad->policy_net = Eigen::VectorXd::Zero(policy.net.params().size());
    policy.net.backward(pc, d_mu, grad->policy_net);
    grad->log_std = Eigen::VectorXd::Zero(2);
    for (int i = 0; i < 2; ++i) {
      double g = (g_lp.array() * (Z.row(i).transpose().array().square() - 1.0)).sum() -
                 cfg.entropy_coefficient;
      bool inside = policy.log_std(i) >= kLogStdMin && policy.log_std(i) <= kLogStdMax;
      grad->log_std(i) = inside ? g : 0.0;
    }
    Eigen::MatrixXd d_v = (2.0 * cfg.value_coefficient * inv_b) * dv.transpose();
    grad->value_net = Eigen::VectorXd::Zero(value.net.params().size());
    value.net.backward(vc, d_v, grad->value_net);
  }
  return out;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& s,
               double learning_rate) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (s.m.size() != params.size()) {
    s.m = Eigen::VectorXd::Zero(params.size());
    s.v = Eigen::VectorXd::Zero(params.size());
    s.steps = 0;
  }
  ++s.steps;
  s.m = b1 * s.m + (1.0 - b1) * grad;
  s.v = b2 * s.v + (1.0 - b2) * grad.cwiseAbs2();
  double c1 = 1.0 - std::pow(b1, static_cast<double>(s.steps));
  double c2 = 1.0 - std::pow(b2, static_cast<double>(s.steps));
  params.array() -= learning_rate * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + eps);
}

namespace {

void clip_norm(std::initializer_list<Eigen::VectorXd*> parts, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (auto* p : parts) sq += p->squaredNorm();
  double norm = std::sqrt(sq);
  if (norm > max_norm)
    for (auto* p : parts) *p *= max_norm / norm;
}

}  // namespace

PpoUpdateResult ppo_update(const PolicyParams& policy, const ValueParams& value,
                           const RolloutBatch& batch, const TrainConfig& cfg,
                           PpoOptimizer& optimizer, std::mt19937_64& rng) {
  PpoUpdateResult out{policy, value, {}};
  PpoOptimizer opt = optimizer;
  const Eigen::Index n = batch.size();
  const Eigen::Index mb = std::min<Eigen::Index>(cfg.minibatch_size, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (int epoch = 0; epoch < cfg.epochs_per_batch && n > 0; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += mb) {
      std::span<const Eigen::Index> idx(order.data() + start,
                                        static_cast<std::size_t>(std::min(mb, n - start)));
      PpoGradients g;
      auto terms = ppo_loss(out.policy, out.value, batch, idx, cfg, &g);
      if (!std::isfinite(terms.total) || !g.policy_net.allFinite() || !g.log_std.allFinite() ||
          !g.value_net.allFinite())
        throw NumericalError("non-finite PPO loss in epoch " + std::to_string(epoch) +
                             ", minibatch " + std::to_string(start / mb) +
                             " (samples " + std::to_string(start) + ".." +
                             std::to_string(start + static_cast<Eigen::Index>(idx.size()) - 1) +
                             ")");
      clip_norm({&g.policy_net, &g.log_std}, cfg.max_grad_norm);
      clip_norm({&g.value_net}, cfg.max_grad_norm);
      adam_step(out.policy.net.params(), g.policy_net, opt.policy_net, cfg.learning_rate);
      adam_step(out.policy.log_std, g.log_std, opt.log_std, cfg.learning_rate);
      adam_step(out.value.net.params(), g.value_net, opt.value_net, cfg.learning_rate);
      auto& st = out.stats;
      st.last = terms;
      st.mean_policy_loss += terms.policy;
      st.mean_value_loss += terms.value;
      st.mean_approx_kl += terms.approx_kl;
      ++st.minibatches;
    }
  }
  if (out.stats.minibatches > 0) {
    auto k = static_cast<double>(out.stats.minibatches);
    out.stats.mean_policy_loss /= k;
    out.stats.mean_value_loss /= k;
    out.stats.mean_approx_kl /= k;
  }
  optimizer = std::move(opt);
  return out;
}

EpisodeOutcome run_episode(const PolicyParams& policy, Environment& env, bool deterministic,
                           std::mt19937_64* rng) {
  if (!deterministic && !rng) throw ValidationError("stochastic rollout needs a generator");
  if (static_cast<std::size_t>(policy.net.input_size()) != env.observation_size())
    throw ValidationError("policy expects " + std::to_string(policy.net.input_size()) +
                          " features, environment provides " +
                          std::to_string(env.observation_size()));
  EpisodeOutcome out;
  auto obs = env.reset();
  const double factor = env.config().penalty_factor;
  while (!env.done()) {
    Eigen::Map<const Eigen::VectorXd> x(obs.features.data(),
                                        static_cast<Eigen::Index>(obs.features.size()));
    Action a;
    if (deterministic) {
      a = mean_action(policy, x);
    } else {
      auto po = policy_forward(policy, x);
      a = sample_action(po.mean, po.log_std, *rng).action;
    }
    auto r = env.step(a);
    out.ret += r.reward;
    out.penalty += r.penalty_raw * factor;
    out.overactions += r.info.any() ? 1 : 0;
    out.trace.push_back(env.trace_row(r));
    out.records.push_back(r.record);
    obs = std::move(r.observation);
  }
  const auto& ep = env.episode();
  out.profit = objective(out.records, ep.plant, ep.econ);
  return out;
}

std::string format_curve(const std::vector<CurvePoint>& curve) {
  std::string out = "iteration,steps,return,profit,overactions\n";
  for (const auto& p : curve)
    out += std::to_string(p.iteration) + ',' + std::to_string(p.steps) + ',' +
           format_double(p.ret) + ',' + format_double(p.profit) + ',' +
           std::to_string(p.overactions) + '\n';
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

struct Slot {
  Environment env;
  std::mt19937_64 rng;
  Eigen::VectorXd obs;
};

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void collect(Slot& slot, const PolicyParams& policy, const TrainConfig& cfg,
             RolloutBatch& b, Eigen::Index begin, Eigen::Index length) {
  for (Eigen::Index k = 0; k < length; ++k) {
    Eigen::Index c = begin + k;
    b.observations.col(c) = slot.obs;
    auto po = policy_forward(policy, slot.obs);
    auto s = sample_action(po.mean, po.log_std, slot.rng);
    auto r = slot.env.step(s.action);
    b.pre_squash.col(c) = s.pre_squash;
    b.actions(0, c) = s.action.bess;
    b.actions(1, c) = s.action.awe;
    b.log_probs(c) = s.log_prob;
    b.rewards(c) = r.reward * cfg.reward_scale;
    b.dones[static_cast<std::size_t>(c)] = r.done ? 1 : 0;
    slot.obs = r.done ? to_vector(slot.env.reset().features) : to_vector(r.observation.features);
  }
}

}  // namespace

TrainResult train(const EnvFactory& make_env, const TrainConfig& cfg, const TrainHooks& hooks) {
  auto problems = validate(cfg);
  if (!problems.empty()) throw ValidationError("invalid train config: " + problems.front());

  std::mt19937_64 rng(derive_seed(cfg.seed, 0));
  Environment eval_env = make_env(0);
  const int obs_dim = static_cast<int>(eval_env.observation_size());
  TrainResult res{make_policy(obs_dim, cfg, rng), make_value(obs_dim, cfg, rng), {}};
  if (cfg.total_steps == 0) return res;

  const auto E = static_cast<std::size_t>(cfg.num_envs);
  std::vector<Slot> slots;
  slots.reserve(E);
  for (std::size_t i = 0; i < E; ++i) {
    Slot s{make_env(i), std::mt19937_64(derive_seed(cfg.seed, 1 + i)), {}};
    if (s.env.observation_size() != static_cast<std::size_t>(obs_dim))
      throw ValidationError("environment factory produced mismatched observation sizes");
    s.obs = to_vector(s.env.reset(derive_seed(cfg.seed, 1000 + i)).features);
    slots.push_back(std::move(s));
  }

  PpoOptimizer opt;
  long steps = 0;
  int iteration = 0;
  while (steps < cfg.total_steps) {
    const long n = std::min(cfg.train_batch_size, cfg.total_steps - steps);
    std::vector<Eigen::Index> begin(E), length(E);
    Eigen::Index cursor = 0;
    for (std::size_t i = 0; i < E; ++i) {
      begin[i] = cursor;
      length[i] = n / static_cast<long>(E) + (static_cast<long>(i) < n % static_cast<long>(E));
      cursor += length[i];
    }

    RolloutBatch b;
    b.observations.resize(obs_dim, n);
    b.pre_squash.resize(2, n);
    b.actions.resize(2, n);
    b.log_probs.resize(n);
    b.rewards.resize(n);
    b.dones.assign(static_cast<std::size_t>(n), 0);

    const std::size_t W = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), E);
    std::vector<std::exception_ptr> errors(W);
    auto work = [&](std::size_t w) {
      try {
        for (std::size_t i = w; i < E; i += W) collect(slots[i], res.policy, cfg, b, begin[i], length[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    if (W == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      for (std::size_t w = 0; w < W; ++w) threads.emplace_back(work, w);
      for (auto& t : threads) t.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    b.values = res.value.net.forward(b.observations).row(0).transpose();
    Eigen::MatrixXd next_obs(obs_dim, static_cast<Eigen::Index>(E));
    for (std::size_t i = 0; i < E; ++i) next_obs.col(static_cast<Eigen::Index>(i)) = slots[i].obs;
    Eigen::VectorXd bootstrap = res.value.net.forward(next_obs).row(0).transpose();
    b.advantages.resize(n);
    b.returns.resize(n);
    for (std::size_t i = 0; i < E; ++i) {
      if (length[i] == 0) continue;
      auto s = static_cast<std::size_t>(begin[i]);
      auto len = static_cast<std::size_t>(length[i]);
      auto g = gae(std::span<const double>(b.rewards.data() + s, len),
                   std::span<const double>(b.values.data() + s, len),
                   std::span<const std::uint8_t>(b.dones.data() + s, len),
                   bootstrap(static_cast<Eigen::Index>(i)), cfg.gamma, cfg.gae_lambda);
      for (std::size_t k = 0; k < len; ++k) {
        b.advantages(static_cast<Eigen::Index>(s + k)) = g.advantages[k];
        b.returns(static_cast<Eigen::Index>(s + k)) = g.returns[k];
      }
    }
    normalize_advantages(b);

    auto upd = ppo_update(res.policy, res.value, b, cfg, opt, rng);
    res.policy = std::move(upd.policy);
    res.value = std::move(upd.value);
    steps += n;
    ++iteration;

    auto outcome = run_episode(res.policy, eval_env, true);
    CurvePoint point{iteration, steps, outcome.ret, outcome.profit, outcome.overactions};
    res.curve.push_back(point);
    if (hooks.on_iteration) hooks.on_iteration(point, upd.stats);
    if (!std::isnan(cfg.target_profit) && outcome.profit >= cfg.target_profit) break;
  }
  return res;
}

namespace {

void put_u32(std::string& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((x >> (8 * i)) & 0xFF);
}

void put_f64(std::string& out, double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) out += static_cast<char>((bits >> (8 * i)) & 0xFF);
}

struct Reader {
  std::string_view bytes;
  std::size_t pos = 0;

  void need(std::size_t n) {
    if (pos + n > bytes.size()) throw FormatError("checkpoint truncated at byte " + std::to_string(pos));
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes[pos++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= std::uint32_t{static_cast<std::uint8_t>(bytes[pos++])} << (8 * i);
    return x;
  }
  double f64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= std::uint64_t{static_cast<std::uint8_t>(bytes[pos++])} << (8 * i);
    return std::bit_cast<double>(x);
  }
};

constexpr std::string_view kMagic = "CPLANPPO";
constexpr std::uint32_t kVersion = 1;

void put_shape(std::string& out, const Mlp& net, std::uint32_t extra) {
  put_u32(out, static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    put_u32(out, static_cast<std::uint32_t>(l.in));
    put_u32(out, static_cast<std::uint32_t>(l.out));
    out += static_cast<char>(l.act);
  }
  put_u32(out, extra);
}

void put_weights(std::string& out, const Mlp& net) {
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto w = net.weight(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) put_f64(out, w(r, c));
    auto b = net.bias(l);
    for (Eigen::Index r = 0; r < b.size(); ++r) put_f64(out, b(r));
  }
}

Mlp read_shape(Reader& in, std::uint32_t& extra) {
  auto layers = in.u32();
  if (layers == 0 || layers > 64) throw FormatError("checkpoint: implausible layer count");
  std::vector<int> sizes;
  std::vector<Activation> acts;
  for (std::uint32_t l = 0; l < layers; ++l) {
    auto i = in.u32(), o = in.u32();
    auto a = in.u8();
    if (a > 2) throw FormatError("checkpoint: unknown activation code " + std::to_string(a));
    if (l == 0) sizes.push_back(static_cast<int>(i));
    else if (static_cast<int>(i) != sizes.back()) throw FormatError("checkpoint: layer shapes do not chain");
    sizes.push_back(static_cast<int>(o));
    acts.push_back(static_cast<Activation>(a));
  }
  extra = in.u32();
  return Mlp(sizes, acts);
}

void read_weights(Reader& in, Mlp& net) {
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto w = net.weight(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = in.f64();
    auto b = net.bias(l);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = in.f64();
  }
}

}  // namespace

std::string encode_checkpoint(const PolicyParams& policy, const ValueParams& value) {
  std::string out(kMagic);
  put_u32(out, kVersion);
  put_u32(out, 2);
  put_shape(out, policy.net, static_cast<std::uint32_t>(policy.log_std.size()));
  put_shape(out, value.net, 0);
  put_weights(out, policy.net);
  for (Eigen::Index i = 0; i < policy.log_std.size(); ++i) put_f64(out, policy.log_std(i));
  put_weights(out, value.net);
  return out;
}

std::pair<PolicyParams, ValueParams> decode_checkpoint(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) throw FormatError("not a checkpoint (bad magic)");
  Reader in{bytes, kMagic.size()};
  auto version = in.u32();
  if (version != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  if (in.u32() != 2) throw FormatError("checkpoint must hold exactly 2 networks");
  std::uint32_t policy_extra = 0, value_extra = 0;
  PolicyParams p;
  ValueParams v;
  p.net = read_shape(in, policy_extra);
  v.net = read_shape(in, value_extra);
  if (p.net.output_size() != 2 || policy_extra != 2 || v.net.output_size() != 1 || value_extra != 0 ||
      v.net.input_size() != p.net.input_size())
    throw FormatError("checkpoint networks have the wrong heads");
  read_weights(in, p.net);
  p.log_std.resize(2);
  for (int i = 0; i < 2; ++i) p.log_std(i) = in.f64();
  read_weights(in, v.net);
  if (in.pos != bytes.size()) throw FormatError("checkpoint has trailing bytes");
  if (!p.net.params().allFinite() || !v.net.params().allFinite() || !p.log_std.allFinite())
    throw NumericalError("checkpoint contains non-finite weights");
  return {std::move(p), std::move(v)};
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& policy,
                     const ValueParams& value) {
  write_text_file(path, encode_checkpoint(policy, value));
}

std::pair<PolicyParams, ValueParams> load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_text_file(path));
}

}  // namespace cplan
