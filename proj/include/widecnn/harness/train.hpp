#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "widecnn/network.hpp"

namespace widecnn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double decay_factor = 0.5;
  std::size_t decay_interval = 500;  // epochs between decays; 0 disables decay
  std::size_t epochs = 3000;
  std::size_t batch_size = 0;  // 0 = full batch
  bool stop_at_zero_train_error = false;
  /// Plain steps W -= lr * grad instead of Adam; a point with zero gradient stays put.
  bool gradient_descent = false;
  std::uint64_t seed = 0;  // mini-batch order

  void validate() const;
};

struct TrainResult {
  Params params;
  std::vector<double> loss_curve;  // Phi on the training set before each epoch's updates
  double final_loss = 0.0;
  std::size_t epochs_run = 0;
  std::size_t train_errors = 0;
  std::size_t test_errors = 0;
};

/// Number of rows whose largest output does not sit at the sample's label.
std::size_t classification_errors(const Matrix& output, const std::vector<int>& labels);
std::size_t classification_errors(const NetworkSpec& spec, const Params& params, const Dataset& data);

/// Called after every epoch with (epoch, loss, train errors); returning false stops training.
using EpochCallback = std::function<bool(std::size_t, double, std::size_t)>;

/// Adam on every W and b using backward gradients of 0.5 ||F_L - Y||^2. Throws
/// TrainingDiverged (with the epoch) when the loss stops being finite.
TrainResult train_adam(const NetworkSpec& spec, Params params, const Dataset& train,
                       const std::optional<Dataset>& test, const AdamConfig& cfg,
                       const EpochCallback& on_epoch = {});

}  // namespace widecnn
