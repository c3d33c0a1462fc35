#include "widecnn/spec_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "widecnn/error.hpp"

namespace widecnn {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "widecnn-netspec/1";

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::Format, "netspec: " + what); }

void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) fail(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!ok.count(item.key())) fail("unknown key '" + item.key() + "' in " + where);
  }
}

std::size_t get_size(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) fail("missing '" + std::string(key) + "' in " + where);
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) fail("'" + std::string(key) + "' in " + where + " must be a non-negative integer");
  return v.get<std::size_t>();
}

json layout_to_json(const PatchLayout& layout) {
  return std::visit(
      [&](const auto& origin) -> json {
        using T = std::decay_t<decltype(origin)>;
        if constexpr (std::is_same_v<T, FullPatch>) {
          return {{"builder", "full"}, {"width", origin.width}};
        } else if constexpr (std::is_same_v<T, Strided1d>) {
          return {{"builder", "strided1d"}, {"width", origin.width}, {"size", origin.size}, {"stride", origin.stride}};
        } else if constexpr (std::is_same_v<T, Grid2d>) {
          return {{"builder", "grid2d"},         {"height", origin.height},     {"width", origin.width},
                  {"channels", origin.channels}, {"kernel_h", origin.kernel_h}, {"kernel_w", origin.kernel_w},
                  {"stride", origin.stride},     {"per_channel", origin.per_channel}};
        } else {
          return {{"builder", "explicit"}, {"source_width", layout.source_width()}, {"patches", layout.patches()}};
        }
      },
      layout.origin());
}

PatchLayout layout_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("builder") || !j.at("builder").is_string()) {
    fail(where + " needs a string 'builder'");
  }
  const std::string builder = j.at("builder").get<std::string>();
  if (builder == "full") {
    only_keys(j, {"builder", "width"}, where);
    return PatchLayout::full(get_size(j, "width", where));
  }
  if (builder == "strided1d") {
    only_keys(j, {"builder", "width", "size", "stride"}, where);
    return PatchLayout::strided_1d(get_size(j, "width", where), get_size(j, "size", where), get_size(j, "stride", where));
  }
  if (builder == "grid2d") {
    only_keys(j, {"builder", "height", "width", "channels", "kernel_h", "kernel_w", "stride", "per_channel"}, where);
    Grid2d g;
    g.height = get_size(j, "height", where);
    g.width = get_size(j, "width", where);
    g.channels = get_size(j, "channels", where);
    g.kernel_h = get_size(j, "kernel_h", where);
    g.kernel_w = get_size(j, "kernel_w", where);
    g.stride = get_size(j, "stride", where);
    if (j.contains("per_channel")) {
      if (!j.at("per_channel").is_boolean()) fail("'per_channel' in " + where + " must be a boolean");
      g.per_channel = j.at("per_channel").get<bool>();
    }
    return PatchLayout::grid_2d(g);
  }
  if (builder == "explicit") {
    only_keys(j, {"builder", "source_width", "patches"}, where);
    const std::size_t width = get_size(j, "source_width", where);
    if (!j.contains("patches") || !j.at("patches").is_array()) fail(where + " needs a 'patches' list");
    std::vector<std::vector<std::size_t>> patches;
    for (const json& patch : j.at("patches")) {
      if (!patch.is_array()) fail("each patch in " + where + " must be a list");
      std::vector<std::size_t> indices;
      for (const json& idx : patch) {
        if (!idx.is_number_unsigned()) fail("patch indices in " + where + " must be non-negative integers");
        indices.push_back(idx.get<std::size_t>());
      }
      patches.push_back(std::move(indices));
    }
    return PatchLayout(width, patches);
  }
  fail("unknown layout builder '" + builder + "' in " + where);
}

Activation activation_from_json(const json& j, const std::string& where) {
  if (!j.is_string()) fail("'activation' in " + where + " must be a string");
  try {
    return Activation::parse(j.get<std::string>());
  } catch (const Error& e) {
    fail(std::string(e.what()) + " in " + where);
  }
}

}  // namespace

std::string to_text(const NetworkSpec& spec) {
  json layers = json::array();
  for (const LayerSpec& layer : spec.layers()) {
    json entry;
    entry["kind"] = to_string(layer.kind());
    switch (layer.kind()) {
      case LayerKind::Convolutional:
        entry["filters"] = layer.filter_count();
        entry["activation"] = layer.activation().name();
        entry["layout"] = layout_to_json(layer.layout());
        break;
      case LayerKind::FullyConnected:
        entry["out_width"] = layer.filter_count();
        entry["activation"] = layer.activation().name();
        break;
      case LayerKind::MaxPool:
        entry["layout"] = layout_to_json(layer.layout());
        break;
      case LayerKind::Output:
        entry["out_width"] = layer.filter_count();
        break;
    }
    layers.push_back(std::move(entry));
  }
  json doc{{"format", kFormat}, {"input_width", spec.input_width()}, {"layers", std::move(layers)}};
  return doc.dump(2) + "\n";
}

NetworkSpec spec_from_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  only_keys(doc, {"format", "input_width", "layers"}, "document");
  if (!doc.contains("format") || doc.at("format") != kFormat) fail(std::string("expected format '") + kFormat + "'");
  const std::size_t input_width = get_size(doc, "input_width", "document");
  if (!doc.contains("layers") || !doc.at("layers").is_array()) fail("missing 'layers' list");

  std::vector<LayerSpec> layers;
  std::size_t prev = input_width;
  std::size_t k = 0;
  for (const json& entry : doc.at("layers")) {
    ++k;
    const std::string where = "layer " + std::to_string(k);
    if (!entry.is_object() || !entry.contains("kind") || !entry.at("kind").is_string()) {
      fail(where + " needs a string 'kind'");
    }
    const std::string kind = entry.at("kind").get<std::string>();
    if (kind == "conv") {
      only_keys(entry, {"kind", "filters", "activation", "layout"}, where);
      if (!entry.contains("layout")) fail(where + " needs a 'layout'");
      layers.push_back(LayerSpec::convolutional(layout_from_json(entry.at("layout"), where + " layout"),
                                                get_size(entry, "filters", where),
                                                activation_from_json(entry.value("activation", json()), where)));
    } else if (kind == "fc") {
      only_keys(entry, {"kind", "out_width", "activation"}, where);
      layers.push_back(LayerSpec::fully_connected(prev, get_size(entry, "out_width", where),
                                                  activation_from_json(entry.value("activation", json()), where)));
    } else if (kind == "maxpool") {
      only_keys(entry, {"kind", "layout"}, where);
      if (!entry.contains("layout")) fail(where + " needs a 'layout'");
      layers.push_back(LayerSpec::max_pool(layout_from_json(entry.at("layout"), where + " layout")));
    } else if (kind == "output") {
      only_keys(entry, {"kind", "out_width"}, where);
      layers.push_back(LayerSpec::output(prev, get_size(entry, "out_width", where)));
    } else {
      fail("unknown layer kind '" + kind + "' in " + where);
    }
    prev = layers.back().width();
  }
  return NetworkSpec(input_width, std::move(layers));
}

NetworkSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Format, "cannot open spec file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return spec_from_text(buffer.str());
}

void save_spec(const NetworkSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Format, "cannot write spec file " + path.string());
  out << to_text(spec);
}

}  // namespace widecnn
