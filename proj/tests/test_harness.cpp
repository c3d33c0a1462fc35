#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "support.hpp"
#include "widecnn/assumptions.hpp"
#include "widecnn/backprop.hpp"
#include "widecnn/constructions.hpp"
#include "widecnn/error.hpp"
#include "widecnn/harness/config.hpp"
#include "widecnn/harness/csv.hpp"
#include "widecnn/harness/datasets.hpp"
#include "widecnn/harness/experiments.hpp"
#include "widecnn/harness/idx.hpp"
#include "widecnn/harness/templates.hpp"
#include "widecnn/harness/train.hpp"

using namespace widecnn;
namespace fs = std::filesystem;
namespace wt = widecnn::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no widecnn::Error thrown");
  return ErrorKind::Structural;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "widecnn_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("idx files") {
  const fs::path images = scratch("two.idx3"), labels = scratch("two.idx1");
  write_bytes(images, {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 51, 102, 255, 0, 0, 204});
  write_bytes(labels, {0, 0, 8, 1, 0, 0, 0, 2, 3, 7});
  const Dataset d = load_idx(images, labels);
  REQUIRE(d.size() == 2);
  CHECK(d.X.cols() == 4);
  CHECK(d.X(0, 0) == 0.0);
  CHECK(d.X(0, 1) == 1.0);
  CHECK(d.X(0, 2) == doctest::Approx(0.2));
  CHECK(d.X(1, 3) == doctest::Approx(0.8));
  CHECK(d.Y.cols() == 10);
  CHECK(d.Y(0, 3) == 1.0);
  CHECK(d.Y(1, 7) == 1.0);
  CHECK(d.Y.sum() == 2.0);
  CHECK(*d.labels == std::vector<int>{3, 7});
  CHECK(*d.Z == Matrix::Identity(10, 10));

  SUBCASE("wrong magic") {
    CHECK(kind_of([&] { (void)read_idx_labels(images); }) == ErrorKind::Format);
    CHECK(kind_of([&] { (void)read_idx_images(labels); }) == ErrorKind::Format);
  }
  SUBCASE("truncated pixels") {
    const fs::path cut = scratch("cut.idx3");
    write_bytes(cut, {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 51});
    try {
      (void)read_idx_images(cut);
      FAIL("expected a format error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Format);
      CHECK(std::string(e.what()).find("at byte 19") != std::string::npos);
    }
  }
  SUBCASE("count mismatch") {
    const fs::path one = scratch("one.idx1");
    write_bytes(one, {0, 0, 8, 1, 0, 0, 0, 1, 3});
    CHECK(kind_of([&] { (void)load_idx(images, one); }) == ErrorKind::Format);
  }
  SUBCASE("round trip") {
    IdxImages img;
    img.count = 3;
    img.rows = 2;
    img.cols = 3;
    std::mt19937 rng(1);
    for (int i = 0; i < 18; ++i) img.pixels.push_back(static_cast<std::uint8_t>(rng() % 256));
    const fs::path path = scratch("rt.idx3");
    write_idx_images(path, img);
    const IdxImages back = read_idx_images(path);
    CHECK(back.count == 3);
    CHECK(back.rows == 2);
    CHECK(back.cols == 3);
    CHECK(back.pixels == img.pixels);
    const std::vector<std::uint8_t> lab{0, 9, 4};
    write_idx_labels(scratch("rt.idx1"), lab);
    CHECK(read_idx_labels(scratch("rt.idx1")) == lab);
  }
}

TEST_CASE("csv") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_line({"x", "y z", "1,2"}) == "x,y z,\"1,2\"");
  const auto rows = parse_csv("# comment\na,\"b,c\",\"d\"\"e\"\n1,2,3\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"a", "b,c", "d\"e"});
  CHECK(rows[1] == std::vector<std::string>{"1", "2", "3"});
  CHECK(kind_of([] { (void)parse_csv("\"open\n"); }) == ErrorKind::Format);
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);

  const fs::path path = scratch("out.csv");
  fs::remove(path);
  {
    CsvWriter w(path, "test/1", {"a", "b"});
    w.write({"1", "x,y"});
    CHECK(kind_of([&] { w.write({"1"}); }) == ErrorKind::Format);
  }
  {
    CsvWriter w(path, "test/1", {"a", "b"}, true);
    w.write({"2", "z"});
  }
  const std::string text = slurp(path);
  CHECK(text.rfind("# schema: test/1\n", 0) == 0);
  const auto parsed = parse_csv(text);
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[2] == std::vector<std::string>{"2", "z"});
  CHECK(kind_of([&] { CsvWriter(path, "test/1", {"a", "c"}, true); }) == ErrorKind::Format);
  CHECK(kind_of([&] { CsvWriter(path, "test/2", {"a", "b"}, true); }) == ErrorKind::Format);

  CHECK(rank_report_header("F_1").size() == rank_report_fields(estimate_rank(Matrix::Identity(2, 2))).size());
  CHECK(bound_report_header().size() == bound_report_fields(BoundReport{}).size());
}

TEST_CASE("experiment configs") {
  const ExperimentConfig cfg = config_from_text(R"({
    "experiment": "table2-sweep",
    "dataset": {"source": "synthetic-digits", "seed": 4},
    "seeds": [1, 2],
    "n_subset": 128,
    "t1_values": [2, 4],
    "epochs": 10,
    "learning_rate": {"initial": 0.01, "decay_factor": 0.1, "decay_interval": 5},
    "adam": {"beta1": 0.8, "beta2": 0.99, "epsilon": 1e-6}
  })");
  CHECK(*cfg.experiment == "table2-sweep");
  CHECK(cfg.dataset.source == DataSource::SyntheticDigits);
  CHECK(cfg.dataset.seed == 4);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(cfg.t1_values == std::vector<std::size_t>{2, 4});
  CHECK(cfg.training.epochs == 10);
  CHECK(cfg.training.learning_rate == 0.01);
  CHECK(cfg.training.decay_interval == 5);
  CHECK(cfg.training.beta1 == 0.8);
  CHECK(cfg.training.epsilon == 1e-6);
  CHECK_FALSE(cfg.training.gradient_descent);
  CHECK(config_from_text(R"({"optimizer": "gd"})").training.gradient_descent);
  CHECK(kind_of([] { (void)config_from_text(R"({"optimizer": "sgd"})"); }) == ErrorKind::Config);

  CHECK(kind_of([] { (void)config_from_text(R"({"epochs": 3, "typo": 1})"); }) == ErrorKind::Config);
  CHECK(kind_of([] { (void)config_from_text(R"({"dataset": {"n": 3, "colour": 1}})"); }) == ErrorKind::Config);
  CHECK(kind_of([] { (void)config_from_text(R"({"epochs": 0})"); }) == ErrorKind::Config);
  CHECK(kind_of([] { (void)config_from_text(R"({"experiment": "nope"})"); }) == ErrorKind::Config);
  CHECK(kind_of([] { (void)config_from_text(R"({"dataset": {"source": "idx"}})"); }) == ErrorKind::Config);
  CHECK(kind_of([] { (void)config_from_text("{not json"); }) == ErrorKind::Config);
  CHECK(kind_of([] { (void)load_config(scratch("missing.json")); }) == ErrorKind::Config);
}

TEST_CASE("synthetic data") {
  const PatchLayout layout = PatchLayout::strided_1d(10, 3, 1);
  const Dataset a = synthesize_dataset(16, 10, 2, 5, 1e-5, layout);
  const Dataset b = synthesize_dataset(16, 10, 2, 5, 1e-5, layout);
  CHECK(a.X == b.X);
  CHECK(a.Y == b.Y);
  CHECK(check_distinct_patches(a.X, layout).holds);
  CHECK(synthesize_dataset(16, 10, 2, 5, 0.0, layout).size() == 16);
  CHECK(synthesize_dataset(1, 10, 2, 5, 1e-5).size() == 1);
  for (Eigen::Index i = 0; i < 16; ++i) CHECK(a.Y.row(i) == a.Z->row((*a.labels)[static_cast<std::size_t>(i)]));

  const std::vector<int> labels = balanced_labels(10, 3, 2);
  std::vector<int> counts(3, 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  CHECK(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()) <= 1);

  const Dataset digits = synthetic_digits(40, 1, 2);
  CHECK(digits.X.cols() == 784);
  CHECK(digits.X.minCoeff() >= 0.0);
  CHECK(digits.X.maxCoeff() <= 1.0);
  CHECK(digits.Y.cols() == 10);
  CHECK(synthetic_digits(40, 1, 2).X == digits.X);
}

TEST_CASE("training") {
  SUBCASE("linear model loss decreases") {
    const NetworkSpec spec(3, {LayerSpec::output(3, 2)});
    const Dataset data = synthesize_dataset(12, 3, 2, 1, 1e-5);
    AdamConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 20;
    const TrainResult r = train_adam(spec, Params::zeros(spec), data, std::nullopt, cfg);
    CHECK(r.epochs_run == 20);
    for (std::size_t e = 1; e < 10; ++e) CHECK(r.loss_curve[e] < r.loss_curve[e - 1]);
    CHECK(r.final_loss < r.loss_curve.front());
  }
  SUBCASE("a global minimum is a fixed point") {
    const DemoNet demo = zero_loss_demo(1);
    const Dataset data = synthesize_dataset(8, demo.spec.input_width(), 2, 2, 1e-5, demo.spec.input_layout());
    const ZeroLossResult z = zero_loss_construction(demo.spec, data, demo.wide_layer, ConstructionParams::defaults(0));
    AdamConfig cfg;
    cfg.epochs = 10;
    cfg.gradient_descent = true;
    cfg.learning_rate = 1e-4;  // output weights near norm 160 make 1e-3 an unstable step here
    const TrainResult r = train_adam(demo.spec, z.params, data, std::nullopt, cfg);
    for (double l : r.loss_curve) CHECK(l <= 1e-12);
    CHECK(r.final_loss <= 1e-12);
    CHECK(r.train_errors == 0);
  }
  SUBCASE("reproducible mini-batches and early stop") {
    const NetworkSpec spec = small_conv_spec(8, 3, 1, 4, {6}, 2);
    const Dataset data = synthesize_dataset(16, 8, 2, 3, 1e-5, spec.input_layout());
    AdamConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 15;
    cfg.batch_size = 5;
    cfg.seed = 9;
    const Params init = Params::gaussian(spec, 1, 1.0, true);
    const TrainResult a = train_adam(spec, init, data, data, cfg);
    const TrainResult b = train_adam(spec, init, data, data, cfg);
    CHECK(a.loss_curve == b.loss_curve);
    CHECK(a.params.at(1).W == b.params.at(1).W);
    CHECK(a.test_errors == a.train_errors);
    std::size_t calls = 0;
    const TrainResult c = train_adam(spec, init, data, std::nullopt, cfg, [&](std::size_t, double, std::size_t) {
      return ++calls < 3;
    });
    CHECK(c.epochs_run == 3);
  }
  SUBCASE("divergence is reported") {
    const NetworkSpec spec(2, {LayerSpec::fully_connected(2, 2, Activation::relu()), LayerSpec::output(2, 1)});
    Dataset data = synthesize_dataset(4, 2, 1, 3, 0.0);
    data.X *= 1e300;
    AdamConfig cfg;
    cfg.epochs = 5;
    CHECK(kind_of([&] { (void)train_adam(spec, Params::gaussian(spec, 1), data, std::nullopt, cfg); }) ==
          ErrorKind::TrainingDiverged);
  }
  SUBCASE("classification errors") {
    Matrix out(3, 2);
    out << 0.9, 0.1, 0.2, 0.8, 0.6, 0.4;
    CHECK(classification_errors(out, {0, 1, 1}) == 1);
  }
}

TEST_CASE("experiment runners") {
  SUBCASE("rank genericity") {
    const NetworkSpec spec = small_conv_spec(10, 3, 1, 4, {}, 1);
    const Dataset data = synthesize_dataset(20, 10, 1, 2, 1e-5, spec.input_layout());
    const fs::path path = scratch("rank.csv");
    fs::remove(path);
    RankGenericitySummary s;
    {
      CsvWriter csv(path, "rank/1", rank_genericity_header());
      s = run_rank_genericity(spec, data.X, 1, {0, 1, 2, 3, 4}, &csv);
    }
    CHECK(s.full_rank_count == 5);
    CHECK(s.fraction == 1.0);
    CHECK(parse_csv(slurp(path)).size() == 6);

    const NetworkSpec narrow = small_conv_spec(10, 3, 1, 2, {}, 1);  // n_1 = 16 < 17
    const Dataset more = synthesize_dataset(17, 10, 1, 2, 1e-5, narrow.input_layout());
    CHECK(run_rank_genericity(narrow, more.X, 1, {0, 1, 2}).fraction == 0.0);

    const NetworkSpec relu = small_conv_spec(10, 3, 1, 4, {}, 1, Activation::relu());
    const RankGenericitySummary r = run_rank_genericity(relu, data.X, 1, {0, 1, 2});
    CHECK(r.rows.size() == 3);
  }
  SUBCASE("table 2 schema and a short sweep") {
    CHECK(table2_header() == std::vector<std::string>{"T_1", "size(F_1)", "rank(F_1)", "sigma_min(F_1)", "size(F_3)",
                                                      "rank(F_3)", "sigma_min(F_3)", "Loss (x1e-5)", "Train error",
                                                      "Test error"});
    const Dataset train = synthetic_digits(24, 1, 2), test = synthetic_digits(24, 1, 3);
    Table2Options options;
    options.t1_values = {1};
    options.training.epochs = 2;
    const auto rows = run_table2_sweep(train, test, options);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].F1.rows == 24);
    CHECK(rows[0].F1.cols == 676);
    CHECK(rows[0].F1.estimated_rank == 24);
    CHECK(table2_fields(rows[0]).size() == table2_header().size());
    CHECK(table2_fields(rows[0])[1] == "24x676");
  }
  SUBCASE("gradient bounds over seeds") {
    const NetworkSpec spec = small_conv_spec(8, 3, 1, 3, {5}, 2);
    const Dataset data = synthesize_dataset(10, 8, 2, 1, 1e-5, spec.input_layout());
    const auto reports = run_grad_bounds(spec, data, 1, {0, 1, 2, 3});
    REQUIRE(reports.size() == 4);
    for (const BoundReport& r : reports) CHECK(r.sandwich_holds());
  }
  SUBCASE("data loading") {
    DatasetConfig dc;
    dc.n = 12;
    dc.d = 6;
    dc.test_n = 4;
    const ExperimentData d = load_experiment_data(dc, 6, 256);
    CHECK(d.train.size() == 12);
    REQUIRE(d.test);
    CHECK(d.test->size() == 4);
    dc.source = DataSource::SyntheticDigits;
    CHECK(kind_of([&] { (void)load_experiment_data(dc, 10, 8); }) == ErrorKind::Config);
  }
}

TEST_CASE("templates") {
  CHECK(table2_spec(2).widths() == std::vector<std::size_t>{784, 1352, 338, 2880, 720, 100, 10});
  CHECK(figure1_spec(100).width(1) == 67600);
  for (int c = 1; c <= 3; ++c) {
    const DemoNet demo = zero_loss_demo(c);
    CHECK(demo.spec.depth() - demo.wide_layer >= static_cast<std::size_t>(c));
  }
  CHECK_THROWS_AS(zero_loss_demo(4), Error);
}
