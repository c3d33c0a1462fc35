#include "widecnn/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "widecnn/error.hpp"

namespace widecnn {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::Config, what); }

void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) fail(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!ok.count(item.key())) fail("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& into) {
  if (!obj.contains(key)) return;
  try {
    const json& v = obj.at(key);
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_unsigned()) fail(std::string("'") + key + "' must be a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(std::string("'") + key + "' must be a number");
    }
    into = v.get<T>();
  } catch (const json::exception& e) {
    fail(std::string("bad value for '") + key + "': " + e.what());
  }
}

const std::set<std::string>& experiment_names() {
  static const std::set<std::string> names{"check-assumptions", "construct-independent", "construct-zeroloss",
                                           "fit-expressivity",  "rank-genericity",       "table2-sweep",
                                           "grad-bounds",       "train",                 "width-audit"};
  return names;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (experiment && !experiment_names().count(*experiment)) fail("unknown experiment '" + *experiment + "'");
  if (seeds.empty()) fail("seeds must not be empty");
  if (trials == 0) fail("trials must be at least 1");
  if (t1_values.empty()) fail("t1_values must not be empty");
  for (std::size_t t : t1_values) {
    if (t == 0) fail("t1_values must be positive");
  }
  if (dataset.source == DataSource::Idx && (dataset.images.empty() || dataset.labels.empty())) {
    fail("idx datasets need 'images' and 'labels' paths");
  }
  if (dataset.source == DataSource::Synthetic && (dataset.n == 0 || dataset.d == 0 || dataset.classes == 0)) {
    fail("synthetic datasets need positive n, d and classes");
  }
  if (dataset.perturb_sigma < 0.0) fail("perturb_sigma must be non-negative");
  try {
    training.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

ExperimentConfig config_from_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  only_keys(doc,
            {"experiment", "dataset", "spec", "seeds", "n_subset", "wide_layer", "trials", "t1_values", "epochs",
             "batch_size", "stop_at_zero_train_error", "optimizer", "output", "learning_rate", "adam"},
            "config");
  ExperimentConfig cfg;
  if (doc.contains("experiment")) {
    std::string name;
    read(doc, "experiment", name);
    cfg.experiment = name;
  }
  if (doc.contains("dataset")) {
    const json& ds = doc.at("dataset");
    only_keys(ds,
              {"source", "n", "d", "classes", "test_n", "seed", "perturb_sigma", "images", "labels", "test_images",
               "test_labels"},
              "dataset");
    std::string source = "synthetic";
    read(ds, "source", source);
    if (source == "synthetic") {
      cfg.dataset.source = DataSource::Synthetic;
    } else if (source == "synthetic-digits") {
      cfg.dataset.source = DataSource::SyntheticDigits;
    } else if (source == "idx") {
      cfg.dataset.source = DataSource::Idx;
    } else {
      fail("unknown dataset source '" + source + "'");
    }
    read(ds, "n", cfg.dataset.n);
    read(ds, "d", cfg.dataset.d);
    read(ds, "classes", cfg.dataset.classes);
    read(ds, "test_n", cfg.dataset.test_n);
    read(ds, "seed", cfg.dataset.seed);
    read(ds, "perturb_sigma", cfg.dataset.perturb_sigma);
    read(ds, "images", cfg.dataset.images);
    read(ds, "labels", cfg.dataset.labels);
    read(ds, "test_images", cfg.dataset.test_images);
    read(ds, "test_labels", cfg.dataset.test_labels);
  }
  if (doc.contains("spec")) {
    std::string path;
    read(doc, "spec", path);
    cfg.spec_path = path;
  }
  if (doc.contains("output")) {
    std::string path;
    read(doc, "output", path);
    cfg.output = path;
  }
  read(doc, "seeds", cfg.seeds);
  read(doc, "n_subset", cfg.n_subset);
  read(doc, "wide_layer", cfg.wide_layer);
  read(doc, "trials", cfg.trials);
  read(doc, "t1_values", cfg.t1_values);
  read(doc, "epochs", cfg.training.epochs);
  read(doc, "batch_size", cfg.training.batch_size);
  read(doc, "stop_at_zero_train_error", cfg.training.stop_at_zero_train_error);
  if (doc.contains("optimizer")) {
    std::string optimizer;
    read(doc, "optimizer", optimizer);
    if (optimizer != "adam" && optimizer != "gd") fail("optimizer must be 'adam' or 'gd'");
    cfg.training.gradient_descent = optimizer == "gd";
  }
  if (doc.contains("learning_rate")) {
    const json& lr = doc.at("learning_rate");
    only_keys(lr, {"initial", "decay_factor", "decay_interval"}, "learning_rate");
    read(lr, "initial", cfg.training.learning_rate);
    read(lr, "decay_factor", cfg.training.decay_factor);
    read(lr, "decay_interval", cfg.training.decay_interval);
  }
  if (doc.contains("adam")) {
    const json& adam = doc.at("adam");
    only_keys(adam, {"beta1", "beta2", "epsilon"}, "adam");
    read(adam, "beta1", cfg.training.beta1);
    read(adam, "beta2", cfg.training.beta2);
    read(adam, "epsilon", cfg.training.epsilon);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_text(buffer.str());
}

}  // namespace widecnn
