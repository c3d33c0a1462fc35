#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "widecnn/analysis.hpp"
#include "widecnn/harness/config.hpp"
#include "widecnn/harness/csv.hpp"
#include "widecnn/harness/train.hpp"
#include "widecnn/network.hpp"
#include "widecnn/rank.hpp"

namespace widecnn {

struct ExperimentData {
  Dataset train;
  std::optional<Dataset> test;
};

/// Builds the datasets a config describes.
///   synthetic: cfg.n Gaussian samples of width input_width (test_n more
///     when requested), checked for distinct patches under `layout`.
///   synthetic-digits: n_subset training images and test_n (n_subset when 0)
///     held-out images.
///   idx: the first n_subset samples of the files (Config error when fewer exist).
/// Training inputs of the image sources get N(0, perturb_sigma) noise.
ExperimentData load_experiment_data(const DatasetConfig& cfg, std::size_t input_width, std::size_t n_subset,
                                    const std::optional<PatchLayout>& layout = std::nullopt);

struct RankGenericityRow {
  std::uint64_t seed = 0;
  RankReport rank;  // of F_k
  bool full = false;  // rank(F_k) = N
};

struct RankGenericitySummary {
  std::vector<RankGenericityRow> rows;
  std::size_t full_rank_count = 0;
  double fraction = 0.0;
};

std::vector<std::string> rank_genericity_header();

/// Per seed: standard Gaussian layers 1..k, forward, rank of F_k. Rows go to
/// `csv` as they are produced, followed by a summary comment.
RankGenericitySummary run_rank_genericity(const NetworkSpec& spec, const Matrix& X, std::size_t k,
                                          const std::vector<std::uint64_t>& seeds, CsvWriter* csv = nullptr);

struct Table2Row {
  std::size_t T1 = 0;
  RankReport F1;
  RankReport F3;
  double loss = 0.0;  // Phi / N on the training set
  std::size_t train_errors = 0;
  std::size_t test_errors = 0;
  // Diagnostics that are not part of the table.
  RankReport F1_initial;
  std::size_t epochs_run = 0;
};

/// Column order of the table: T_1, size(F_1), rank(F_1), sigma_min(F_1),
/// size(F_3), rank(F_3), sigma_min(F_3), Loss (x1e-5), Train error, Test error.
std::vector<std::string> table2_header();
std::vector<std::string> table2_fields(const Table2Row& row);

struct Table2Options {
  std::vector<std::size_t> t1_values{2, 4, 8, 16};
  AdamConfig training;
  std::uint64_t seed = 0;  // weight initialization
};

using Table2Progress = std::function<void(const Table2Row&)>;

/// For each T_1: build table2_spec(T_1), initialize with fan-in scaled
/// Gaussian weights, train with Adam and record the ranks of F_1 and F_3.
std::vector<Table2Row> run_table2_sweep(const Dataset& train, const Dataset& test, const Table2Options& options,
                                        CsvWriter* csv = nullptr, const Table2Progress& progress = {});

/// Gradient sandwich at Gaussian random parameters, one report per seed.
std::vector<BoundReport> run_grad_bounds(const NetworkSpec& spec, const Dataset& data, std::size_t k,
                                         const std::vector<std::uint64_t>& seeds, CsvWriter* csv = nullptr);

}  // namespace widecnn
