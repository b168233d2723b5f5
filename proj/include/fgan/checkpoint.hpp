#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fgan/models.hpp"

namespace fgan::models {

struct CheckpointMeta {
  int epochs = 0;
  float final_g_loss = 0.0f;
  float final_d_loss = 0.0f;
  std::uint64_t seed = 0;
  int image_size = 0;  // training frame extent; enhance() enforces it
};

/// Everything needed to reconstruct both networks bit-exactly.
struct Checkpoint {
  GeneratorSpec gen_spec;
  DiscriminatorSpec disc_spec;
  CheckpointMeta meta;
  /// "g."/"d."-prefixed names in directory order; payloads follow this order
  /// in the file.
  std::vector<std::pair<std::string, ad::Tensor>> tensors;

  static Checkpoint snapshot(UNetGenerator& gen, PatchDiscriminator& disc,
                             const CheckpointMeta& meta);

  UNetGenerator restore_generator() const;
  PatchDiscriminator restore_discriminator() const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// File layout: magic "FGAN", u32-LE format version, u32-LE header length,
/// UTF-8 JSON header (specs, metadata, ordered tensor directory of
/// name/dims), then raw float32-LE payloads in directory order.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fgan::models
