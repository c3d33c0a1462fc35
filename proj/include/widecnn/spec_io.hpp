#pragma once

#include <filesystem>
#include <string>

#include "widecnn/network.hpp"

namespace widecnn {

/// Network spec files are JSON documents:
///
///   {
///     "format": "widecnn-netspec/1",
///     "input_width": 784,
///     "layers": [
///       {"kind": "conv", "filters": 10, "activation": "sigmoid",
///        "layout": {"builder": "grid2d", "height": 28, "width": 28, "channels": 1,
///                   "kernel_h": 3, "kernel_w": 3, "stride": 1, "per_channel": false}},
///       {"kind": "maxpool", "layout": {"builder": "strided1d", "width": 6760, "size": 2, "stride": 2}},
///       {"kind": "fc", "out_width": 100, "activation": "softplus(10)"},
///       {"kind": "output", "out_width": 10}
///     ]
///   }
///
/// Layouts are one of "full" {width}, "strided1d" {width, size, stride},
/// "grid2d" {...} or "explicit" {source_width, patches: [[...], ...]}. FC and
/// output layers carry no layout. Unknown keys are rejected. See
/// docs/netspec.md for the full key list.
std::string to_text(const NetworkSpec& spec);
NetworkSpec spec_from_text(const std::string& text);

NetworkSpec load_spec(const std::filesystem::path& path);
void save_spec(const NetworkSpec& spec, const std::filesystem::path& path);

}  // namespace widecnn
