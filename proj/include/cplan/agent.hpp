#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cplan/env.hpp"
#include "cplan/mlp.hpp"

namespace cplan {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

struct TrainConfig {
  double learning_rate = 3e-5;
  long train_batch_size = 8000;
  long minibatch_size = 512;
  int epochs_per_batch = 10;
  double clip_epsilon = 0.2;
  double gamma = 0.999;
  double gae_lambda = 0.95;
  double entropy_coefficient = 0.0;
  double value_coefficient = 0.5;
  long total_steps = 2'000'000;
  std::uint64_t seed = 0;
  int num_envs = 8;
  int workers = 1;
  int hidden_width = 256;
  int hidden_layers = 3;
  double reward_scale = 1e-5;    // rewards enter the learner multiplied by this
  double max_grad_norm = 0.5;    // per network; 0 disables clipping
  double initial_log_std = -0.5;
  // Stop after the first iteration whose evaluation profit reaches this.
  double target_profit = std::numeric_limits<double>::quiet_NaN();

  template <class Visitor>
  void visit_fields(Visitor&& v) {
    v("learning_rate", learning_rate);
    v("train_batch_size", train_batch_size);
    v("minibatch_size", minibatch_size);
    v("epochs_per_batch", epochs_per_batch);
    v("clip_epsilon", clip_epsilon);
    v("gamma", gamma);
    v("gae_lambda", gae_lambda);
    v("entropy_coefficient", entropy_coefficient);
    v("value_coefficient", value_coefficient);
    v("total_steps", total_steps);
    v("seed", seed);
    v("num_envs", num_envs);
    v("workers", workers);
    v("hidden_width", hidden_width);
    v("hidden_layers", hidden_layers);
    v("reward_scale", reward_scale);
    v("max_grad_norm", max_grad_norm);
    v("initial_log_std", initial_log_std);
    v("target_profit", target_profit);
  }
};

std::vector<std::string> validate(const TrainConfig& cfg);

struct PolicyParams {
  Mlp net;                  // obs -> mean of the pre-squash Gaussian (2)
  Eigen::VectorXd log_std;  // 2 entries, state independent, raw (unclamped)

  Eigen::VectorXd effective_log_std() const {
    return log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  }
};

struct ValueParams {
  Mlp net;  // obs -> scalar
};

PolicyParams make_policy(int obs_dim, const TrainConfig& cfg, std::mt19937_64& rng);
ValueParams make_value(int obs_dim, const TrainConfig& cfg, std::mt19937_64& rng);

struct PolicyOutput {
  Eigen::Vector2d mean;
  Eigen::Vector2d log_std;  // clamped
};

PolicyOutput policy_forward(const PolicyParams& params, const Eigen::VectorXd& obs);

// bess = tanh(u0), awe = (tanh(u1) + 1) / 2.
Action squash(const Eigen::Vector2d& u);
Eigen::Vector2d unsquash(const Action& a);

struct ActionSample {
  Action action;
  Eigen::Vector2d pre_squash;
  double log_prob = 0.0;  // density of `action`, including the squash Jacobian
};

ActionSample sample_action(const Eigen::Vector2d& mean, const Eigen::Vector2d& log_std,
                           std::mt19937_64& rng);
double squashed_log_prob(const Eigen::Vector2d& u, const Eigen::Vector2d& mean,
                         const Eigen::Vector2d& log_std);
Action mean_action(const PolicyParams& params, const Eigen::VectorXd& obs);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// values[t] estimates step t; bootstrap is V after the last step (ignored if
// that step is done).
GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double bootstrap, double gamma,
              double lambda);

struct RolloutBatch {
  Eigen::MatrixXd observations;  // obs_dim x N
  Eigen::MatrixXd pre_squash;    // 2 x N
  Eigen::MatrixXd actions;       // 2 x N, squashed
  Eigen::VectorXd log_probs;
  Eigen::VectorXd rewards;       // scaled by reward_scale
  Eigen::VectorXd values;
  std::vector<std::uint8_t> dones;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  Eigen::Index size() const { return log_probs.size(); }
};

// Shifts and scales advantages to zero mean and unit variance.
void normalize_advantages(RolloutBatch& batch);

struct LossTerms {
  double policy = 0.0;     // -E[min(rho A, clip(rho) A)]
  double value = 0.0;      // E[(V - R)^2]
  double entropy = 0.0;    // Gaussian entropy of the pre-squash distribution
  double total = 0.0;      // policy + c_v value - c_e entropy
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

struct PpoGradients {
  Eigen::VectorXd policy_net;
  Eigen::VectorXd log_std;
  Eigen::VectorXd value_net;
};

// Loss over the samples `idx`; fills `grad` with d total / d params if given.
LossTerms ppo_loss(const PolicyParams& policy, const ValueParams& value,
                   const RolloutBatch& batch, std::span<const Eigen::Index> idx,
                   const TrainConfig& cfg, PpoGradients* grad = nullptr);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long steps = 0;
};

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
               double learning_rate);

struct PpoOptimizer {
  AdamState policy_net;
  AdamState log_std;
  AdamState value_net;
};

struct UpdateStats {
  LossTerms last;  // terms of the final minibatch
  double mean_policy_loss = 0.0;
  double mean_value_loss = 0.0;
  double mean_approx_kl = 0.0;
  std::size_t minibatches = 0;
};

struct PpoUpdateResult {
  PolicyParams policy;
  ValueParams value;
  UpdateStats stats;
};

// Epochs of shuffled minibatch Adam steps; a non-finite loss throws
// NumericalError naming the minibatch and leaves `optimizer` untouched.
PpoUpdateResult ppo_update(const PolicyParams& policy, const ValueParams& value,
                           const RolloutBatch& batch, const TrainConfig& cfg,
                           PpoOptimizer& optimizer, std::mt19937_64& rng);

struct EpisodeOutcome {
  double ret = 0.0;        // sum of rewards, penalties included
  double profit = 0.0;     // objective of the applied dispatch
  double penalty = 0.0;    // sum of penalty_raw * penalty_factor
  long overactions = 0;    // steps with any overaction flag
  std::vector<HourRecord> records;
  std::vector<TraceRow> trace;
};

// One full episode from reset; deterministic uses the policy mean.
EpisodeOutcome run_episode(const PolicyParams& policy, Environment& env, bool deterministic,
                           std::mt19937_64* rng = nullptr);

struct CurvePoint {
  int iteration = 0;
  long steps = 0;
  double ret = 0.0;
  double profit = 0.0;
  long overactions = 0;
};

std::string format_curve(const std::vector<CurvePoint>& curve);

using EnvFactory = std::function<Environment(std::size_t slot)>;

struct TrainHooks {
  std::function<void(const CurvePoint&, const UpdateStats&)> on_iteration;
};

struct TrainResult {
  PolicyParams policy;
  ValueParams value;
  std::vector<CurvePoint> curve;
};

// Slot i of num_envs draws actions from its own generator seeded from
// (cfg.seed, i); workers only partition slots, so results do not depend on
// the worker count.
TrainResult train(const EnvFactory& make_env, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Binary layout, all integers and floats little-endian:
//   "CPLANPPO"             8 bytes
//   version                u32 (1)
//   network count          u32 (2: policy, value)
//   per network:           u32 layer count, then per layer u32 in, u32 out,
//                          u8 activation (0 identity, 1 tanh, 2 relu);
//                          u32 extra vector length (policy: 2, value: 0)
//   per network, per layer: weights f64 row-major (out x in), biases f64;
//                          then the extra vector f64 (policy log_std)
void save_checkpoint(const std::filesystem::path& path, const PolicyParams& policy,
                     const ValueParams& value);
std::string encode_checkpoint(const PolicyParams& policy, const ValueParams& value);
std::pair<PolicyParams, ValueParams> decode_checkpoint(std::string_view bytes);
std::pair<PolicyParams, ValueParams> load_checkpoint(const std::filesystem::path& path);

}  // namespace cplan
