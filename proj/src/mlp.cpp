#include "cplan/mlp.hpp"

#include <cmath>

#include "cplan/errors.hpp"

namespace cplan {

Mlp::Mlp(const std::vector<int>& sizes, const std::vector<Activation>& acts) {
  if (sizes.size() < 2 || acts.size() + 1 != sizes.size())
    throw ValidationError("Mlp: need n+1 sizes for n activations");
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l] < 1 || sizes[l + 1] < 1) throw ValidationError("Mlp: layer sizes must be >= 1");
    Layer layer{sizes[l], sizes[l + 1], acts[l], offset};
    offset += static_cast<Eigen::Index>(layer.in) * layer.out + layer.out;
    layers_.push_back(layer);
  }
  params_ = Eigen::VectorXd::Zero(offset);
}

Mlp Mlp::trunk(int in, int width, int depth, int out) {
  std::vector<int> sizes{in};
  std::vector<Activation> acts;
  for (int d = 0; d < depth; ++d) {
    sizes.push_back(width);
    acts.push_back(d + 1 == depth ? Activation::Relu : Activation::Tanh);
  }
  sizes.push_back(out);
  acts.push_back(Activation::Identity);
  return Mlp(sizes, acts);
}

void Mlp::init_orthogonal(std::mt19937_64& rng, double head_gain) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    int rows = std::max(layer.out, layer.in);
    int cols = std::min(layer.out, layer.in);
    Eigen::MatrixXd g(rows, cols);
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    // Sign fix makes the factor unique (uniform over orthogonal matrices).
    Eigen::VectorXd diag = qr.matrixQR().diagonal();
    for (Eigen::Index j = 0; j < cols; ++j)
      if (diag(j) < 0) q.col(j) = -q.col(j);
    double gain = (l + 1 == layers_.size()) ? head_gain : std::sqrt(2.0);
    if (layer.out >= layer.in)
      weight(l) = gain * q;
    else
      weight(l) = gain * q.transpose();
    bias(l).setZero();
  }
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(std::size_t l) {
  const auto& L = layers_[l];
  return {params_.data() + L.offset, L.out, L.in};
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(std::size_t l) const {
  const auto& L = layers_[l];
  return {params_.data() + L.offset, L.out, L.in};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(std::size_t l) {
  const auto& L = layers_[l];
  return {params_.data() + L.offset + static_cast<Eigen::Index>(L.out) * L.in, L.out};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t l) const {
  const auto& L = layers_[l];
  return {params_.data() + L.offset + static_cast<Eigen::Index>(L.out) * L.in, L.out};
}

namespace {

template <class M>
void apply_activation(Activation act, M&& z) {
  switch (act) {
    case Activation::Identity: break;
    case Activation::Tanh: z = z.array().tanh(); break;
    case Activation::Relu: z = z.array().max(0.0); break;
  }
}

}  // namespace

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_size())
    throw ValidationError("Mlp: input has " + std::to_string(x.rows()) + " rows, expected " +
                          std::to_string(input_size()));
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = weight(l) * a;
    z.colwise() += bias(l);
    apply_activation(layers_[l].act, z);
    a = std::move(z);
  }
  return a;
}

Eigen::VectorXd Mlp::forward_one(const Eigen::VectorXd& x) const {
  if (x.size() != input_size())
    throw ValidationError("Mlp: input has " + std::to_string(x.size()) + " features, expected " +
                          std::to_string(input_size()));
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::VectorXd z = weight(l) * a + bias(l);
    apply_activation(layers_[l].act, z);
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache& cache) const {
  if (x.rows() != input_size())
    throw ValidationError("Mlp: input has " + std::to_string(x.rows()) + " rows, expected " +
                          std::to_string(input_size()));
  cache.activations.resize(layers_.size() + 1);
  cache.activations[0] = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = weight(l) * cache.activations[l];
    z.colwise() += bias(l);
    apply_activation(layers_[l].act, z);
    cache.activations[l + 1] = std::move(z);
  }
  return cache.activations.back();
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& d_out,
                   Eigen::VectorXd& grad) const {
  if (grad.size() != params_.size()) grad = Eigen::VectorXd::Zero(params_.size());
  Eigen::MatrixXd delta = d_out;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& L = layers_[l];
    const auto& a = cache.activations[l + 1];
    switch (L.act) {
      case Activation::Identity: break;
      case Activation::Tanh: delta.array() *= 1.0 - a.array().square(); break;
      case Activation::Relu: delta.array() *= (a.array() > 0.0).cast<double>(); break;
    }
    Eigen::Map<Eigen::MatrixXd> dW(grad.data() + L.offset, L.out, L.in);
    Eigen::Map<Eigen::VectorXd> db(grad.data() + L.offset + static_cast<Eigen::Index>(L.out) * L.in,
                                   L.out);
    dW.noalias() += delta * cache.activations[l].transpose();
    db += delta.rowwise().sum();
    if (l > 0) delta = weight(l).transpose() * delta;
  }
}

double Mlp::lipschitz_bound() const {
  double bound = 1.0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(weight(l));
    bound *= svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  }
  return bound;  // tanh and relu are 1-Lipschitz
}

}  // namespace cplan
