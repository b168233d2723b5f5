#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fgan/image.hpp"
#include "fgan/models.hpp"

namespace fgan::probe {

/// Named intermediate activations captured from one generator forward pass,
/// in capture order.
struct ActivationSet {
  std::vector<std::pair<std::string, ad::Tensor>> items;

  const ad::Tensor* find(const std::string& name) const;
};

/// Taps the named stages of a frozen generator during a single forward pass.
/// Names must be unique and come from gen.layer_names(); anything else raises
/// ConfigError listing the valid set. Tapping never changes the model output.
ActivationSet capture(const models::UNetGenerator& gen, const Image& input,
                      std::span<const std::string> layer_names);

/// Writes one grayscale tile image per layer as `layer_<name>.ppm`: up to
/// max_channels channel maps, each min-max normalised to [0, 255]; constant
/// channels render mid-gray 128. Returns the written paths.
std::vector<std::filesystem::path> export_maps(const ActivationSet& set,
                                               const std::filesystem::path& out_dir,
                                               int max_channels = 16);

}  // namespace fgan::probe
