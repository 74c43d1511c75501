#include "vecoff/rl/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace vecoff::rl {

Mlp::Mlp(const std::vector<std::size_t>& sizes, std::mt19937_64& rng, double output_gain) {
  if (sizes.size() < 2) throw std::invalid_argument("an MLP needs at least input and output sizes");
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(sizes[l]);
    const auto out = static_cast<Eigen::Index>(sizes[l + 1]);
    if (in == 0 || out == 0) throw std::invalid_argument("layer sizes must be positive");
    // He-uniform for the ReLU stack.
    double bound = std::sqrt(6.0 / static_cast<double>(in));
    if (l + 2 == sizes.size()) bound *= output_gain;
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) w(r, c) = dist(rng);
    }
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(out));
  }
}

std::size_t Mlp::input_size() const {
  return weights_.empty() ? 0 : static_cast<std::size_t>(weights_.front().cols());
}

std::size_t Mlp::output_size() const {
  return weights_.empty() ? 0 : static_cast<std::size_t>(weights_.back().rows());
}

std::vector<std::size_t> Mlp::layer_sizes() const {
  std::vector<std::size_t> sizes;
  if (weights_.empty()) return sizes;
  sizes.push_back(input_size());
  for (const auto& w : weights_) sizes.push_back(static_cast<std::size_t>(w.rows()));
  return sizes;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  Eigen::VectorXd h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * h + biases_[l];
    if (l + 1 < weights_.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
  if (static_cast<std::size_t>(x.rows()) != input_size()) {
    throw std::invalid_argument("input has the wrong number of features");
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * h;
    z.colwise() += biases_[l];
    if (cache) {
      cache->inputs.push_back(h);
      cache->pre.push_back(z);
    }
    h = (l + 1 < weights_.size()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : std::move(z);
  }
  return h;
}

Mlp::Gradients Mlp::backward(const Cache& cache, const Eigen::MatrixXd& grad_out) const {
  Gradients g = zero_gradients();
  Eigen::MatrixXd delta = grad_out;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    if (l + 1 < weights_.size()) {
      delta = delta.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
    }
    g.weights[l] = delta * cache.inputs[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) delta = weights_[l].transpose() * delta;
  }
  return g;
}

Mlp::Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(weights_[l].rows(), weights_[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(biases_[l].size()));
  }
  return g;
}

void Mlp::apply(const Gradients& step, double scale) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l] += scale * step.weights[l];
    biases_[l] += scale * step.biases[l];
  }
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) flat.push_back(weights_[l](r, c));
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) flat.push_back(biases_[l](r));
  }
  return flat;
}

void Mlp::unflatten(const std::vector<double>& flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("parameter count mismatch");
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) weights_[l](r, c) = flat[k++];
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) biases_[l](r) = flat[k++];
  }
}

bool Mlp::operator==(const Mlp& other) const {
  if (weights_.size() != other.weights_.size()) return false;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l].rows() != other.weights_[l].rows() ||
        weights_[l].cols() != other.weights_[l].cols() || weights_[l] != other.weights_[l] ||
        biases_[l] != other.biases_[l]) {
      return false;
    }
  }
  return true;
}

void Mlp::Gradients::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
}

double Mlp::Gradients::norm() const {
  double sq = 0.0;
  for (const auto& w : weights) sq += w.squaredNorm();
  for (const auto& b : biases) sq += b.squaredNorm();
  return std::sqrt(sq);
}

void clip_gradients(Mlp::Gradients& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  const double n = grads.norm();
  if (n > max_norm) grads.scale(max_norm / n);
}

Adam::Adam(const Mlp& net, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon),
      m_(net.zero_gradients()), v_(net.zero_gradients()) {}

void Adam::step(Mlp& net, const Mlp::Gradients& grads) {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  const double step = lr_ * std::sqrt(c2) / c1;
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    m_.weights[l] = beta1_ * m_.weights[l] + (1.0 - beta1_) * grads.weights[l];
    v_.weights[l] = beta2_ * v_.weights[l] + (1.0 - beta2_) * grads.weights[l].cwiseAbs2();
    net.weights()[l].array() -= step * m_.weights[l].array() / (v_.weights[l].array().sqrt() + eps_);
    m_.biases[l] = beta1_ * m_.biases[l] + (1.0 - beta1_) * grads.biases[l];
    v_.biases[l] = beta2_ * v_.biases[l] + (1.0 - beta2_) * grads.biases[l].cwiseAbs2();
    net.biases()[l].array() -= step * m_.biases[l].array() / (v_.biases[l].array().sqrt() + eps_);
  }
}

void to_json(nlohmann::json& j, const Mlp& net) {
  j = nlohmann::json::object();
  j["layer_sizes"] = net.layer_sizes();
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& w = net.weights()[l];
    const auto& b = net.biases()[l];
    std::vector<double> wflat;
    wflat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) wflat.push_back(w(r, c));
    }
    std::vector<double> bflat(b.data(), b.data() + b.size());
    layers.push_back({{"weights", wflat}, {"bias", bflat}});
  }
  j["layers"] = layers;
}

void from_json(const nlohmann::json& j, Mlp& net) {
  const auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  const auto& layers = j.at("layers");
  if (sizes.size() < 2 || layers.size() != sizes.size() - 1) {
    throw std::invalid_argument("network layer description is inconsistent");
  }
  net = Mlp();
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(sizes[l]);
    const auto out = static_cast<Eigen::Index>(sizes[l + 1]);
    const auto wflat = layers[l].at("weights").get<std::vector<double>>();
    const auto bflat = layers[l].at("bias").get<std::vector<double>>();
    if (wflat.size() != static_cast<std::size_t>(in * out) || bflat.size() != static_cast<std::size_t>(out)) {
      throw std::invalid_argument("layer " + std::to_string(l) + " has the wrong number of weights");
    }
    Eigen::MatrixXd w(out, in);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) w(r, c) = wflat[k++];
    }
    net.weights().push_back(std::move(w));
    net.biases().push_back(Eigen::Map<const Eigen::VectorXd>(bflat.data(), out));
  }
}

}  // namespace vecoff::rl
