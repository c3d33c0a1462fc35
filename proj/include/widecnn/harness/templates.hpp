#pragma once

#include "widecnn/network.hpp"

namespace widecnn {

/// 28x28 input; conv 3x3 (T1 filters); max-pool 2x2 stride 2; conv 2x2 (20
/// filters); max-pool 2x2 stride 2; fully connected 100; output 10. With
/// T1 = 100 the widths are 784, 67600, 16900, 2880, 720, 100, 10.
NetworkSpec figure1_spec(std::size_t T1 = 100, Activation activation = Activation::sigmoid());

/// The same widths without pooling, so that every layer is differentiable:
/// the two max-pools become 2x2 stride-2 convolutions keeping the channel
/// count. Layer 1 has 676 * T1 units and layer 3 has 2880.
NetworkSpec table2_spec(std::size_t T1, Activation activation = Activation::sigmoid());

/// input d -> 1D conv (patch size, stride, filters) -> fully connected
/// layers of the given widths -> output m, all hidden layers using `activation`.
NetworkSpec small_conv_spec(std::size_t d, std::size_t patch, std::size_t stride, std::size_t filters,
                            const std::vector<std::size_t>& fc_widths, std::size_t m,
                            Activation activation = Activation::sigmoid());

struct DemoNet {
  NetworkSpec spec;
  std::size_t wide_layer;
};

/// Small networks with two outputs for the three zero-loss cases. The wide
/// layer has at least 12 units:
///   1: 6 -> 16 -> 2            (k = L-1)
///   2: 6 -> 16 -> 6 -> 2       (k = L-2)
///   3: 6 -> 12 -> 12 -> 6 -> 4 -> 2   (k = 2 = L-3)
DemoNet zero_loss_demo(int proof_case, Activation activation = Activation::sigmoid());

}  // namespace widecnn
