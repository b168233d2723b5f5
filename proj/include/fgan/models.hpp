#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fgan/image.hpp"
#include "fgan/ops.hpp"
#include "fgan/rng.hpp"
#include "fgan/tensor.hpp"

namespace fgan::models {

struct GeneratorSpec {
  int in_channels = 3;
  int out_channels = 3;
  int base_width = 16;
  int depth = 6;
  std::vector<int> dropout_stages = {0, 1, 2};  // decoder stages, bottleneck first

  void validate() const;
  /// Spatial extent must be divisible by 2^depth.
  void validate_input_extent(int extent) const;
};

struct DiscriminatorSpec {
  int input_channels = 6;  // visual stacked with candidate thermal
  int n_layers = 3;
  int base_width = 16;

  void validate() const;
  /// Extent of the square logit map for a square input, walking the conv
  /// stack; throws ConfigError when the input is smaller than the receptive
  /// field of a single logit.
  int logit_extent(int input_extent) const;
};

using TapFn = std::function<void(const std::string&, const ad::Tensor&)>;

struct ForwardOptions {
  bool training = false;
  Rng* dropout_rng = nullptr;  // required when training with dropout stages
  const TapFn* tap = nullptr;  // observes stage outputs by layer name
  std::uint32_t skip_disable_mask = 0;  // bit j zeroes the skip into decoder stage j
};

struct NamedParam {
  std::string name;
  ad::Tensor* tensor;
};

/// Encoder-decoder translator with skip connections: `depth` stride-2 conv
/// blocks down (widths doubling, capped at 8*base_width), mirrored
/// transposed-conv blocks up with channel concatenation from the matching
/// encoder stage, tanh output. Stage outputs are tappable as enc1..encN /
/// dec1..decN; "out" aliases the final decoder output.
class UNetGenerator {
 public:
  UNetGenerator(GeneratorSpec spec, Rng& rng);

  const GeneratorSpec& spec() const { return spec_; }

  ad::Tensor forward(const ad::Tensor& input, const ForwardOptions& opts = {}) const;

  std::vector<NamedParam> params();
  std::vector<std::string> layer_names() const;
  std::int64_t param_count() const;

 private:
  struct Stage {
    int weight = -1, bias = -1, gamma = -1, beta = -1;  // indices into params_
    bool dropout = false;
  };

  GeneratorSpec spec_;
  mutable std::vector<ad::Tensor> params_;
  std::vector<std::string> names_;
  std::vector<Stage> enc_, dec_;

  friend struct CheckpointCodec;
};

/// Patch discriminator: n_layers stride-2 conv blocks, two stride-1 blocks,
/// 1-channel logit map. Fully convolutional, so the parameter count is
/// independent of input size.
class PatchDiscriminator {
 public:
  PatchDiscriminator(DiscriminatorSpec spec, Rng& rng);

  const DiscriminatorSpec& spec() const { return spec_; }

  ad::Tensor forward(const ad::Tensor& input) const;

  std::vector<NamedParam> params();
  std::int64_t param_count() const;

 private:
  struct Stage {
    int weight = -1, bias = -1, gamma = -1, beta = -1;
    int stride = 2;
  };

  DiscriminatorSpec spec_;
  mutable std::vector<ad::Tensor> params_;
  std::vector<std::string> names_;
  std::vector<Stage> stages_;

  friend struct CheckpointCodec;
};

/// bce(d_fake_logits, 1) + lambda_l1 * l1(fake, real)
ad::Tensor generator_loss(const ad::Tensor& d_fake_logits, const ad::Tensor& fake,
                          const ad::Tensor& real, float lambda_l1);

/// 0.5 * (bce(d_real_logits, 1) + bce(d_fake_logits, 0))
ad::Tensor discriminator_loss(const ad::Tensor& d_real_logits,
                              const ad::Tensor& d_fake_logits);

/// RGB8 -> 1x3xHxW in [-1, 1]: v / 127.5 - 1.
ad::Tensor image_to_tensor(const Image& image);

/// 1x3xHxW -> RGB8: (v + 1) * 127.5, clamped to [0, 255], rounds half up.
/// Inverts image_to_tensor exactly for all 256 byte values.
Image tensor_to_image(const ad::Tensor& t);

/// Inference-mode translation of one frame. The frame must be square with
/// extent `trained_size` (no implicit resizing).
Image enhance(const UNetGenerator& gen, const Image& visual, int trained_size);

/// One visual/thermal training pair.
struct ImagePair {
  Image visual;
  Image thermal;
};

}  // namespace fgan::models
