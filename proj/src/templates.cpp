#include "widecnn/harness/templates.hpp"

#include "widecnn/error.hpp"

namespace widecnn {

namespace {

Grid2d grid(std::size_t side, std::size_t channels, std::size_t kernel, std::size_t stride, bool per_channel) {
  Grid2d g;
  g.height = side;
  g.width = side;
  g.channels = channels;
  g.kernel_h = kernel;
  g.kernel_w = kernel;
  g.stride = stride;
  g.per_channel = per_channel;
  return g;
}

}  // namespace

NetworkSpec figure1_spec(std::size_t T1, Activation activation) {
  std::vector<LayerSpec> layers;
  layers.push_back(LayerSpec::convolutional(PatchLayout::grid_2d(grid(28, 1, 3, 1, false)), T1, activation));
  layers.push_back(LayerSpec::max_pool(PatchLayout::grid_2d(grid(26, T1, 2, 2, true))));
  layers.push_back(LayerSpec::convolutional(PatchLayout::grid_2d(grid(13, T1, 2, 1, false)), 20, activation));
  layers.push_back(LayerSpec::max_pool(PatchLayout::grid_2d(grid(12, 20, 2, 2, true))));
  layers.push_back(LayerSpec::fully_connected(720, 100, activation));
  layers.push_back(LayerSpec::output(100, 10));
  return NetworkSpec(784, std::move(layers));
}

NetworkSpec table2_spec(std::size_t T1, Activation activation) {
  std::vector<LayerSpec> layers;
  layers.push_back(LayerSpec::convolutional(PatchLayout::grid_2d(grid(28, 1, 3, 1, false)), T1, activation));
  layers.push_back(LayerSpec::convolutional(PatchLayout::grid_2d(grid(26, T1, 2, 2, false)), T1, activation));
  layers.push_back(LayerSpec::convolutional(PatchLayout::grid_2d(grid(13, T1, 2, 1, false)), 20, activation));
  layers.push_back(LayerSpec::convolutional(PatchLayout::grid_2d(grid(12, 20, 2, 2, false)), 20, activation));
  layers.push_back(LayerSpec::fully_connected(720, 100, activation));
  layers.push_back(LayerSpec::output(100, 10));
  return NetworkSpec(784, std::move(layers));
}

NetworkSpec small_conv_spec(std::size_t d, std::size_t patch, std::size_t stride, std::size_t filters,
                            const std::vector<std::size_t>& fc_widths, std::size_t m, Activation activation) {
  std::vector<LayerSpec> layers;
  layers.push_back(LayerSpec::convolutional(PatchLayout::strided_1d(d, patch, stride), filters, activation));
  for (std::size_t w : fc_widths) layers.push_back(LayerSpec::fully_connected(layers.back().width(), w, activation));
  layers.push_back(LayerSpec::output(layers.back().width(), m));
  return NetworkSpec(d, std::move(layers));
}

DemoNet zero_loss_demo(int proof_case, Activation activation) {
  switch (proof_case) {
    case 1: return {small_conv_spec(6, 3, 1, 4, {}, 2, activation), 1};
    case 2: return {small_conv_spec(6, 3, 1, 4, {6}, 2, activation), 1};
    case 3: {
      std::vector<LayerSpec> layers;
      layers.push_back(LayerSpec::convolutional(PatchLayout::strided_1d(6, 3, 1), 3, activation));
      layers.push_back(LayerSpec::convolutional(PatchLayout::strided_1d(12, 6, 2), 3, activation));
      layers.push_back(LayerSpec::fully_connected(12, 6, activation));
      layers.push_back(LayerSpec::fully_connected(6, 4, activation));
      layers.push_back(LayerSpec::output(4, 2));
      return {NetworkSpec(6, std::move(layers)), 2};
    }
    default: throw Error(ErrorKind::Precondition, "zero-loss case must be 1, 2 or 3");
  }
}

}  // namespace widecnn
