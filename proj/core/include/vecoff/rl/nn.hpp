#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace vecoff::rl {

/// Fully connected network: ReLU on hidden layers, linear output.
/// Batched calls take one sample per column.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // input to each layer (post-activation of the previous)
    std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  };

  struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    void scale(double factor);
    [[nodiscard]] double norm() const;
  };

  Mlp() = default;
  /// `sizes` = {inputs, hidden..., outputs}. The last layer is initialized
  /// `output_gain` times smaller than the hidden ones.
  Mlp(const std::vector<std::size_t>& sizes, std::mt19937_64& rng, double output_gain = 1.0);

  [[nodiscard]] std::size_t input_size() const;
  [[nodiscard]] std::size_t output_size() const;
  [[nodiscard]] std::size_t layer_count() const { return weights_.size(); }
  [[nodiscard]] std::vector<std::size_t> layer_sizes() const;
  [[nodiscard]] std::size_t parameter_count() const;

  [[nodiscard]] Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache) const;
  /// Gradients of sum(grad_out .* output) with respect to every parameter.
  [[nodiscard]] Gradients backward(const Cache& cache, const Eigen::MatrixXd& grad_out) const;

  [[nodiscard]] Gradients zero_gradients() const;
  void apply(const Gradients& step, double scale);

  /// Flat views in layer order (weights row-major, then bias), for checks and I/O.
  [[nodiscard]] std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);

  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }
  [[nodiscard]] const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  [[nodiscard]] const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  bool operator==(const Mlp& other) const;

 private:
  std::vector<Eigen::MatrixXd> weights_;  // out x in
  std::vector<Eigen::VectorXd> biases_;
};

/// Rescales `grads` so its global L2 norm is at most max_norm (no-op when <= 0).
void clip_gradients(Mlp::Gradients& grads, double max_norm);

class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);
  void step(Mlp& net, const Mlp::Gradients& grads);
  [[nodiscard]] double learning_rate() const { return lr_; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long steps_ = 0;
  Mlp::Gradients m_;
  Mlp::Gradients v_;
};

void to_json(nlohmann::json& j, const Mlp& net);
void from_json(const nlohmann::json& j, Mlp& net);

}  // namespace vecoff::rl
