// widecnn: command-line front end for the constructions and experiments.
//
//   widecnn width-audit --spec specs/fig1.netspec --n 60000
//   widecnn construct-zeroloss --case 3 --seed 7
//   widecnn table2-sweep --config configs/table2.json --out table2.csv
//
// Exit codes: 0 success, 1 a check or construction failed, 2 usage error.

#include <cmath>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "widecnn/analysis.hpp"
#include "widecnn/assumptions.hpp"
#include "widecnn/backprop.hpp"
#include "widecnn/constructions.hpp"
#include "widecnn/error.hpp"
#include "widecnn/forward.hpp"
#include "widecnn/harness/config.hpp"
#include "widecnn/harness/csv.hpp"
#include "widecnn/harness/experiments.hpp"
#include "widecnn/harness/templates.hpp"
#include "widecnn/harness/train.hpp"
#include "widecnn/lifting.hpp"
#include "widecnn/spec_io.hpp"

using namespace widecnn;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Common {
  std::string config_path;
  std::string spec_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

struct Options {
  Common common;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t trials = 0;
  int proof_case = 0;
  std::vector<std::size_t> t1_values;
  std::size_t epochs = 0;
  double tolerance = 1e-14;
};

ExperimentConfig resolve_config(const Options& opt, const std::string& experiment) {
  ExperimentConfig cfg = opt.common.config_path.empty() ? ExperimentConfig{} : load_config(opt.common.config_path);
  if (cfg.experiment && *cfg.experiment != experiment) {
    throw Error(ErrorKind::Config, "config is for '" + *cfg.experiment + "', not '" + experiment + "'");
  }
  if (!opt.common.spec_path.empty()) cfg.spec_path = opt.common.spec_path;
  if (!opt.common.out_path.empty()) cfg.output = opt.common.out_path;
  if (opt.common.seed_set) {
    cfg.seeds = {opt.common.seed};
    cfg.dataset.seed = opt.common.seed;
    cfg.training.seed = opt.common.seed;
  }
  if (opt.n) {
    cfg.dataset.n = opt.n;
    cfg.n_subset = opt.n;
  }
  if (opt.k) cfg.wide_layer = opt.k;
  if (opt.trials) cfg.trials = opt.trials;
  if (!opt.t1_values.empty()) cfg.t1_values = opt.t1_values;
  if (opt.epochs) cfg.training.epochs = opt.epochs;
  cfg.validate();
  return cfg;
}

// A conv net 16 -> 28 -> 8 -> 2 used when no spec is given.
NetworkSpec default_spec() { return small_conv_spec(16, 4, 2, 4, {8}, 2); }

NetworkSpec spec_for(const ExperimentConfig& cfg) {
  return cfg.spec_path ? load_spec(*cfg.spec_path) : default_spec();
}

std::vector<std::uint64_t> seed_list(const ExperimentConfig& cfg) {
  if (cfg.seeds.size() > 1) return cfg.seeds;
  std::vector<std::uint64_t> seeds(cfg.trials);
  for (std::size_t i = 0; i < cfg.trials; ++i) seeds[i] = cfg.seeds.front() + i;
  return seeds;
}

std::unique_ptr<CsvWriter> open_csv(const ExperimentConfig& cfg, const std::string& schema,
                                    std::vector<std::string> header) {
  if (!cfg.output) return nullptr;
  return std::make_unique<CsvWriter>(*cfg.output, schema, std::move(header), true);
}

void print_rank(const std::string& name, const RankReport& r) {
  std::cout << name << ": size=" << r.rows << "x" << r.cols << " rank=" << r.estimated_rank
            << " sigma_min=" << r.sigma_min << " sigma_max=" << r.sigma_max << " threshold=" << r.threshold << "\n";
}

int cmd_width_audit(const Options& opt) {
  const ExperimentConfig cfg = resolve_config(opt, "width-audit");
  const NetworkSpec spec = cfg.spec_path ? load_spec(*cfg.spec_path) : figure1_spec();
  const std::size_t N = opt.n ? opt.n : 60000;
  const WidthAudit audit = width_audit(spec, N);
  std::cout << "widths:";
  for (std::size_t w : audit.widths) std::cout << " " << w;
  std::cout << "\nM=" << audit.max_width << " at layer " << audit.arg_layer << "\nN=" << N
            << "\nwide_enough=" << (audit.wide_enough ? "true" : "false") << "\npyramidal_from="
            << (audit.pyramidal_from ? std::to_string(*audit.pyramidal_from) : "none") << "\n";
  if (auto csv = open_csv(cfg, "widecnn-width-audit/1", {"N", "M", "arg_layer", "wide_enough", "pyramidal_from"})) {
    csv->write({std::to_string(N), std::to_string(audit.max_width), std::to_string(audit.arg_layer),
                audit.wide_enough ? "1" : "0", audit.pyramidal_from ? std::to_string(*audit.pyramidal_from) : ""});
  }
  return kOk;
}

int cmd_check_assumptions(const Options& opt) {
  const ExperimentConfig cfg = resolve_config(opt, "check-assumptions");
  const NetworkSpec spec = spec_for(cfg);
  bool ok = true;
  for (std::size_t k = 1; k <= spec.depth(); ++k) {
    if (!spec.layer(k).has_params()) continue;
    const ConvStructureResult r = check_conv_structure(spec, k, cfg.trials, cfg.seeds.front());
    std::cout << "layer " << k << " (" << to_string(spec.layer(k).kind()) << "): full_rank_fraction="
              << r.full_rank_fraction << "\n";
    ok = ok && r.holds;
  }
  if (auto problem = hidden_activation_problem(spec)) {
    std::cout << "activation: " << *problem << "\n";
    ok = false;
  } else {
    std::cout << "activation: all hidden activations pass the growth condition\n";
  }
  const ExperimentData data =
      load_experiment_data(cfg.dataset, spec.input_width(), cfg.n_subset, spec.input_layout());
  const DistinctPatchesResult distinct = check_distinct_patches(data.train.X, spec.input_layout());
  std::cout << "distinct patches over " << data.train.size() << " samples: " << (distinct.holds ? "yes" : "no");
  if (distinct.witness) {
    const auto& w = *distinct.witness;
    std::cout << " (sample " << w.i << " patch " << w.p << " = sample " << w.j << " patch " << w.q << ")";
  }
  std::cout << "\n";
  ok = ok && distinct.holds;
  const WidthAudit audit = width_audit(spec, data.train.size());
  std::cout << "widest hidden layer " << audit.arg_layer << " with " << audit.max_width << " units; wide_enough="
            << (audit.wide_enough ? "true" : "false") << "\n";
  return ok ? kOk : kFailed;
}

int cmd_construct_independent(const Options& opt) {
  const ExperimentConfig cfg = resolve_config(opt, "construct-independent");
  const NetworkSpec spec = spec_for(cfg);
  const ExperimentData data =
      load_experiment_data(cfg.dataset, spec.input_width(), cfg.n_subset, spec.input_layout());
  const IndependenceResult result =
      independence_construction(spec, data.train.X, cfg.wide_layer, ConstructionParams::defaults(cfg.seeds.front()));
  print_rank("F_" + std::to_string(cfg.wide_layer), result.rank);
  std::cout << "alpha=" << result.alpha << " submatrix_sigma_min=" << result.submatrix_sigma_min << "\n";
  bool lifted_ok = true;
  for (std::size_t l = 1; l <= cfg.wide_layer; ++l) {
    if (!spec.layer(l).has_params()) continue;
    const RankReport r = estimate_rank(lift_weights(spec, l, result.params.at(l).W));
    print_rank("U_" + std::to_string(l), r);
    lifted_ok = lifted_ok && r.full_rank();
  }
  if (auto csv = open_csv(cfg, "widecnn-independence/1", [] {
        std::vector<std::string> h{"seed", "alpha", "submatrix_sigma_min"};
        for (auto& c : rank_report_header("F_k_")) h.push_back(c);
        return h;
      }())) {
    std::vector<std::string> row{std::to_string(cfg.seeds.front()), format_number(result.alpha),
                                 format_number(result.submatrix_sigma_min)};
    for (auto& f : rank_report_fields(result.rank)) row.push_back(f);
    csv->write(row);
  }
  return result.rank.estimated_rank == data.train.size() && lifted_ok ? kOk : kFailed;
}

int cmd_construct_zeroloss(const Options& opt) {
  ExperimentConfig cfg = resolve_config(opt, "construct-zeroloss");
  NetworkSpec spec = default_spec();
  std::size_t k = cfg.wide_layer;
  if (opt.proof_case) {
    DemoNet demo = zero_loss_demo(opt.proof_case);
    spec = demo.spec;
    k = demo.wide_layer;
    if (!opt.n) cfg.dataset.n = 8;
  } else if (cfg.spec_path) {
    spec = load_spec(*cfg.spec_path);
  }
  cfg.dataset.classes = spec.output_width();
  const ExperimentData data =
      load_experiment_data(cfg.dataset, spec.input_width(), cfg.n_subset, spec.input_layout());
  const ZeroLossResult result =
      zero_loss_construction(spec, data.train, k, ConstructionParams::defaults(cfg.seeds.front()));
  const ForwardTrace trace = forward(spec, result.params, data.train.X);
  const SkMembership member = s_k_membership(spec, result.params, trace, k);
  const double bound = opt.tolerance * (1.0 + data.train.Y.squaredNorm());
  std::cout << "case=" << result.proof_case << " k=" << k << " N=" << data.train.size() << "\nPhi=" << result.loss
            << "\nin_S_k=" << (member.in_S_k ? "true" : "false") << "\n";
  print_rank("F_" + std::to_string(k), member.features);
  if (auto csv = open_csv(cfg, "widecnn-zeroloss/1", {"seed", "case", "k", "N", "Phi", "in_S_k"})) {
    csv->write({std::to_string(cfg.seeds.front()), std::to_string(result.proof_case), std::to_string(k),
                std::to_string(data.train.size()), format_number(result.loss), member.in_S_k ? "1" : "0"});
  }
  return result.loss <= bound && member.in_S_k ? kOk : kFailed;
}

int cmd_fit_expressivity(const Options& opt) {
  const ExperimentConfig cfg = resolve_config(opt, "fit-expressivity");
  const NetworkSpec spec = cfg.spec_path ? load_spec(*cfg.spec_path) : small_conv_spec(16, 4, 2, 4, {}, 1);
  const ExperimentData data =
      load_experiment_data(cfg.dataset, spec.input_width(), cfg.n_subset, spec.input_layout());
  std::mt19937_64 rng(cfg.seeds.front());
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y(static_cast<Eigen::Index>(data.train.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = normal(rng);
  const ExpressivityResult fit =
      expressivity_fit(spec, data.train.X, y, ConstructionParams::defaults(cfg.seeds.front()));
  std::cout << "N=" << y.size() << " max_relative_residual=" << fit.max_residual
            << " |lambda|=" << fit.lambda.norm() << "\n";
  if (auto csv = open_csv(cfg, "widecnn-expressivity/1", {"seed", "N", "max_residual", "lambda_norm"})) {
    csv->write({std::to_string(cfg.seeds.front()), std::to_string(y.size()), format_number(fit.max_residual),
                format_number(fit.lambda.norm())});
  }
  return fit.max_residual <= 1e-8 ? kOk : kFailed;
}

int cmd_rank_genericity(const Options& opt) {
  const ExperimentConfig cfg = resolve_config(opt, "rank-genericity");
  const NetworkSpec spec = spec_for(cfg);
  const ExperimentData data =
      load_experiment_data(cfg.dataset, spec.input_width(), cfg.n_subset, spec.input_layout());
  auto csv = open_csv(cfg, "widecnn-rank-genericity/1", rank_genericity_header());
  const RankGenericitySummary summary =
      run_rank_genericity(spec, data.train.X, cfg.wide_layer, seed_list(cfg), csv.get());
  std::cout << "N=" << data.train.size() << " n_k=" << spec.width(cfg.wide_layer) << " trials=" << summary.rows.size()
            << " full_rank=" << summary.full_rank_count << " fraction=" << summary.fraction << "\n";
  return kOk;
}

int cmd_table2_sweep(const Options& opt) {
  ExperimentConfig cfg = resolve_config(opt, "table2-sweep");
  if (cfg.dataset.source == DataSource::Synthetic) cfg.dataset.source = DataSource::SyntheticDigits;
  const ExperimentData data = load_experiment_data(cfg.dataset, 784, cfg.n_subset);
  Table2Options options;
  options.t1_values = cfg.t1_values;
  options.training = cfg.training;
  options.seed = cfg.seeds.front();
  auto csv = open_csv(cfg, "widecnn-table2/1", table2_header());
  const Dataset test = data.test ? *data.test : data.train;
  std::cout << csv_line(table2_header()) << "\n";
  run_table2_sweep(data.train, test, options, csv.get(),
                   [](const Table2Row& row) {
                     std::cout << csv_line(table2_fields(row)) << "  # epochs=" << row.epochs_run
                               << " initial rank(F_1)=" << row.F1_initial.estimated_rank << std::endl;
                   });
  return kOk;
}

int cmd_grad_bounds(const Options& opt) {
  const ExperimentConfig cfg = resolve_config(opt, "grad-bounds");
  const NetworkSpec spec = spec_for(cfg);
  ExperimentConfig adjusted = cfg;
  adjusted.dataset.classes = spec.output_width();
  const ExperimentData data =
      load_experiment_data(adjusted.dataset, spec.input_width(), cfg.n_subset, spec.input_layout());
  std::vector<std::string> header{"seed"};
  for (auto& c : bound_report_header()) header.push_back(c);
  auto csv = open_csv(cfg, "widecnn-grad-bounds/1", header);
  const auto reports = run_grad_bounds(spec, data.train, cfg.wide_layer, seed_list(cfg), csv.get());
  std::size_t held = 0;
  for (const BoundReport& r : reports) held += r.sandwich_holds() ? 1 : 0;
  std::cout << "sandwich held in " << held << " of " << reports.size() << " configurations\n";
  return held == reports.size() ? kOk : kFailed;
}

int cmd_train(const Options& opt) {
  const ExperimentConfig cfg = resolve_config(opt, "train");
  const NetworkSpec spec = spec_for(cfg);
  ExperimentConfig adjusted = cfg;
  adjusted.dataset.classes = spec.output_width();
  const ExperimentData data =
      load_experiment_data(adjusted.dataset, spec.input_width(), cfg.n_subset, spec.input_layout());
  auto csv = open_csv(cfg, "widecnn-train/1", {"epoch", "loss", "train_errors"});
  const Params init = Params::gaussian(spec, cfg.seeds.front(), 1.0, true);
  const TrainResult result = train_adam(spec, init, data.train, data.test, cfg.training,
                                        [&](std::size_t epoch, double loss, std::size_t errors) {
                                          if (csv) {
                                            csv->write({std::to_string(epoch), format_number(loss),
                                                        std::to_string(errors)});
                                          }
                                          return true;
                                        });
  std::cout << "epochs=" << result.epochs_run << " loss=" << result.final_loss
            << " train_errors=" << result.train_errors << " test_errors=" << result.test_errors << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wide-layer CNN constructions and landscape experiments"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.common.config_path, "Experiment config (JSON)");
    sub->add_option("--spec", opt.common.spec_path, "Network spec file");
    sub->add_option("--out", opt.common.out_path, "CSV output path (appended to when the schema matches)");
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& s) {
          opt.common.seed = s;
          opt.common.seed_set = true;
        },
        "Random seed");
    sub->add_option("--n", opt.n, "Number of samples");
  };

  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const std::vector<Entry> entries{
      {"check-assumptions", "Check the structural, activation and distinct-patch assumptions", cmd_check_assumptions},
      {"construct-independent", "Build weights with linearly independent features at the wide layer",
       cmd_construct_independent},
      {"construct-zeroloss", "Build a zero-loss parameter set", cmd_construct_zeroloss},
      {"fit-expressivity", "Fit random scalar targets exactly", cmd_fit_expressivity},
      {"rank-genericity", "Monte-Carlo rank of the wide-layer features at random weights", cmd_rank_genericity},
      {"table2-sweep", "Train over a sweep of first-layer filter counts", cmd_table2_sweep},
      {"grad-bounds", "Evaluate the gradient sandwich at random weights", cmd_grad_bounds},
      {"train", "Train a network with Adam or plain gradient descent", cmd_train},
      {"width-audit", "Report layer widths against the sample count", cmd_width_audit},
  };
  std::map<CLI::App*, int (*)(const Options&)> handlers;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    handlers[sub] = e.run;
    const std::string name = e.name;
    if (name == "construct-independent" || name == "rank-genericity" || name == "grad-bounds" ||
        name == "construct-zeroloss") {
      sub->add_option("--k", opt.k, "Wide layer index");
    }
    if (name == "rank-genericity" || name == "grad-bounds" || name == "check-assumptions") {
      sub->add_option("--trials", opt.trials, "Number of random trials");
    }
    if (name == "construct-zeroloss") {
      sub->add_option("--case", opt.proof_case, "Use the built-in network for case 1, 2 or 3")
          ->check(CLI::Range(1, 3));
      sub->add_option("--tol", opt.tolerance, "Relative loss tolerance");
    }
    if (name == "table2-sweep") sub->add_option("--t1", opt.t1_values, "First-layer filter counts");
    if (name == "table2-sweep" || name == "train") sub->add_option("--epochs", opt.epochs, "Training epochs");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  for (const auto& [sub, run] : handlers) {
    if (!sub->parsed()) continue;
    try {
      return run(opt);
    } catch (const Error& e) {
      std::cerr << e.what() << "\n";
      return e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Format ? kUsage : kFailed;
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return kFailed;
    }
  }
  std::cerr << app.help();
  return kUsage;
}
