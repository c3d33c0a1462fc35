#include "widecnn/harness/experiments.hpp"

#include <sstream>

#include "widecnn/assumptions.hpp"
#include "widecnn/backprop.hpp"
#include "widecnn/error.hpp"
#include "widecnn/forward.hpp"
#include "widecnn/harness/datasets.hpp"
#include "widecnn/harness/idx.hpp"
#include "widecnn/harness/templates.hpp"

namespace widecnn {

ExperimentData load_experiment_data(const DatasetConfig& cfg, std::size_t input_width, std::size_t n_subset,
                                    const std::optional<PatchLayout>& layout) {
  ExperimentData data;
  switch (cfg.source) {
    case DataSource::Synthetic:
      data.train = synthesize_dataset(cfg.n, input_width, cfg.classes, cfg.seed, cfg.perturb_sigma, layout);
      if (cfg.test_n > 0) {
        data.test = synthesize_dataset(cfg.test_n, input_width, cfg.classes, cfg.seed + 1, cfg.perturb_sigma, layout);
      }
      return data;
    case DataSource::SyntheticDigits: {
      if (input_width != 784) throw Error(ErrorKind::Config, "synthetic digits are 28x28 images");
      data.train = synthetic_digits(n_subset, cfg.seed, cfg.seed + 1);
      data.test = synthetic_digits(cfg.test_n ? cfg.test_n : n_subset, cfg.seed, cfg.seed + 2);
      break;
    }
    case DataSource::Idx: {
      Dataset full = load_idx(cfg.images, cfg.labels);
      if (static_cast<std::size_t>(full.X.cols()) != input_width) {
        throw Error(ErrorKind::Config, "IDX images do not match the network input width");
      }
      if (n_subset > full.size()) {
        throw Error(ErrorKind::Config, "n_subset " + std::to_string(n_subset) + " exceeds the " +
                                           std::to_string(full.size()) + " available samples");
      }
      data.train = full.subset(0, n_subset);
      if (!cfg.test_images.empty() && !cfg.test_labels.empty()) {
        Dataset test = load_idx(cfg.test_images, cfg.test_labels);
        const std::size_t count = std::min(test.size(), cfg.test_n ? cfg.test_n : n_subset);
        data.test = test.subset(0, count);
      }
      break;
    }
  }
  data.train.X = perturb_dataset(data.train.X, cfg.perturb_sigma, cfg.seed + 3);
  return data;
}

std::vector<std::string> rank_genericity_header() {
  std::vector<std::string> header{"seed"};
  for (auto& column : rank_report_header("F_k_")) header.push_back(column);
  header.push_back("full_rank");
  return header;
}

RankGenericitySummary run_rank_genericity(const NetworkSpec& spec, const Matrix& X, std::size_t k,
                                          const std::vector<std::uint64_t>& seeds, CsvWriter* csv) {
  const std::size_t N = static_cast<std::size_t>(X.rows());
  RankGenericitySummary summary;
  for (std::uint64_t seed : seeds) {
    const Params params = Params::gaussian(spec, seed, 1.0, false, k);
    RankGenericityRow row;
    row.seed = seed;
    row.rank = estimate_rank(forward(spec, params, X, k).F[k]);
    row.full = row.rank.estimated_rank == N;
    if (row.full) ++summary.full_rank_count;
    if (csv) {
      std::vector<std::string> fields{std::to_string(seed)};
      for (auto& f : rank_report_fields(row.rank)) fields.push_back(f);
      fields.push_back(row.full ? "1" : "0");
      csv->write(fields);
    }
    summary.rows.push_back(row);
  }
  summary.fraction = seeds.empty() ? 0.0 : static_cast<double>(summary.full_rank_count) / seeds.size();
  if (csv) {
    std::ostringstream os;
    os << "summary: " << summary.full_rank_count << " of " << seeds.size() << " trials reached rank " << N
       << " (fraction " << format_number(summary.fraction) << ")";
    csv->comment(os.str());
  }
  return summary;
}

std::vector<std::string> table2_header() {
  return {"T_1",           "size(F_1)",    "rank(F_1)", "sigma_min(F_1)", "size(F_3)",
          "rank(F_3)",     "sigma_min(F_3)", "Loss (x1e-5)", "Train error",  "Test error"};
}

std::vector<std::string> table2_fields(const Table2Row& row) {
  auto size = [](const RankReport& r) { return std::to_string(r.rows) + "x" + std::to_string(r.cols); };
  return {std::to_string(row.T1),
          size(row.F1),
          std::to_string(row.F1.estimated_rank),
          format_number(row.F1.sigma_min),
          size(row.F3),
          std::to_string(row.F3.estimated_rank),
          format_number(row.F3.sigma_min),
          format_number(row.loss * 1e5),
          std::to_string(row.train_errors),
          std::to_string(row.test_errors)};
}

std::vector<Table2Row> run_table2_sweep(const Dataset& train, const Dataset& test, const Table2Options& options,
                                        CsvWriter* csv, const Table2Progress& progress) {
  std::vector<Table2Row> rows;
  for (std::size_t T1 : options.t1_values) {
    const NetworkSpec spec = table2_spec(T1);
    const Params init = Params::gaussian(spec, options.seed, 1.0, true);
    Table2Row row;
    row.T1 = T1;
    row.F1_initial = estimate_rank(forward(spec, init, train.X, 1).F[1]);
    TrainResult trained = train_adam(spec, init, train, test, options.training);
    const ForwardTrace trace = forward(spec, trained.params, train.X);
    row.F1 = estimate_rank(trace.F[1]);
    row.F3 = estimate_rank(trace.F[3]);
    row.loss = loss(trace, train.Y) / static_cast<double>(train.size());
    row.train_errors = trained.train_errors;
    row.test_errors = trained.test_errors;
    row.epochs_run = trained.epochs_run;
    if (csv) csv->write(table2_fields(row));
    if (progress) progress(row);
    rows.push_back(row);
  }
  return rows;
}

std::vector<BoundReport> run_grad_bounds(const NetworkSpec& spec, const Dataset& data, std::size_t k,
                                         const std::vector<std::uint64_t>& seeds, CsvWriter* csv) {
  std::vector<BoundReport> reports;
  for (std::uint64_t seed : seeds) {
    const Params params = Params::gaussian(spec, seed, 1.0, true);
    const ForwardTrace trace = forward(spec, params, data.X);
    reports.push_back(gradient_bounds(spec, params, trace, data.Y, k));
    if (csv) {
      std::vector<std::string> fields{std::to_string(seed)};
      for (auto& f : bound_report_fields(reports.back())) fields.push_back(f);
      csv->write(fields);
    }
  }
  return reports;
}

}  // namespace widecnn
