#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace cplan {

enum class Activation : std::uint8_t { Identity = 0, Tanh = 1, Relu = 2 };

// Fully connected network with all parameters in one flat vector, so the
// optimizer and finite-difference checks can treat it as a single block.
// Samples are columns: forward maps (in x n) to (out x n).
class Mlp {
 public:
  struct Layer {
    int in = 0;
    int out = 0;
    Activation act = Activation::Identity;
    Eigen::Index offset = 0;  // start of the weight block in params()
  };

  Mlp() = default;
  Mlp(const std::vector<int>& sizes, const std::vector<Activation>& acts);

  // width x depth hidden trunk: tanh layers, the last hidden layer relu,
  // then a linear head.
  static Mlp trunk(int in, int width, int depth, int out);

  // Orthogonal init with gain sqrt(2) on hidden layers and `head_gain` on
  // the output layer; biases zero.
  void init_orthogonal(std::mt19937_64& rng, double head_gain);

  int input_size() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_size() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<Layer>& layers() const { return layers_; }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  Eigen::Map<Eigen::MatrixXd> weight(std::size_t l);
  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t l) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t l);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t l) const;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd forward_one(const Eigen::VectorXd& x) const;

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, then each layer output
  };
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache& cache) const;
  // Gradient of a loss w.r.t. params given dLoss/dOutput; accumulates into grad.
  void backward(const Cache& cache, const Eigen::MatrixXd& d_out, Eigen::VectorXd& grad) const;

  // Product of layer spectral norms: a Lipschitz constant of the map.
  double lipschitz_bound() const;

 private:
  std::vector<Layer> layers_;
  Eigen::VectorXd params_;
};

}  // namespace cplan
