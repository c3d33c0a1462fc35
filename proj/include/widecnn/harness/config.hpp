#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "widecnn/harness/train.hpp"

namespace widecnn {

enum class DataSource { Synthetic, SyntheticDigits, Idx };

struct DatasetConfig {
  DataSource source = DataSource::Synthetic;
  std::size_t n = 64;        // synthetic sample count
  std::size_t d = 16;        // synthetic input width
  std::size_t classes = 2;   // synthetic class count
  std::size_t test_n = 0;    // held-out synthetic samples
  std::uint64_t seed = 0;
  double perturb_sigma = 1e-5;  // variance of the added Gaussian noise
  std::string images, labels, test_images, test_labels;
};

/// Experiment settings read from a JSON document. Keys:
///   experiment   one of the CLI subcommand names
///   dataset      {source: "synthetic" | "synthetic-digits" | "idx", n, d,
///                 classes, test_n, seed, perturb_sigma, images, labels,
///                 test_images, test_labels}
///   spec         path to a network spec file
///   seeds        list of unsigned integers
///   n_subset, wide_layer, trials, t1_values, epochs, batch_size,
///   stop_at_zero_train_error, output
///   learning_rate {initial, decay_factor, decay_interval}
///   optimizer    "adam" (default) or "gd"
///   adam         {beta1, beta2, epsilon}
/// Every key is optional; unknown keys are rejected with a Config error.
struct ExperimentConfig {
  std::optional<std::string> experiment;
  DatasetConfig dataset;
  std::optional<std::string> spec_path;
  std::vector<std::uint64_t> seeds{0};
  std::size_t n_subset = 256;
  std::size_t wide_layer = 1;
  std::size_t trials = 100;
  std::vector<std::size_t> t1_values{2, 4, 8, 16};
  AdamConfig training;
  std::optional<std::string> output;

  /// Throws Config when settings contradict each other.
  void validate() const;
};

ExperimentConfig config_from_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace widecnn
