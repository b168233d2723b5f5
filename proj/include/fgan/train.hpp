#pragma once

#include <span>
#include <vector>

#include "fgan/checkpoint.hpp"
#include "fgan/models.hpp"

namespace fgan::models {

struct TrainConfig {
  int epochs = 200;
  float lr = 2e-4f;
  float beta1 = 0.5f;
  float lambda_l1 = 100.0f;
  std::uint64_t seed = 0;
  int image_size = 64;  // batch size is fixed at 1
  GeneratorSpec gen;
  DiscriminatorSpec disc;

  void validate() const;
};

struct EpochLosses {
  double g_total = 0.0;
  double g_adv = 0.0;
  double g_l1 = 0.0;
  double d = 0.0;

  bool finite() const;
};

struct TrainOutput {
  UNetGenerator generator;
  PatchDiscriminator discriminator;
  std::vector<EpochLosses> history;  // one entry per epoch
  bool diverged = false;             // a loss went non-finite; loop stopped early
};

/// Alternating per-sample updates: one discriminator step, then one generator
/// step, Adam(lr, beta1) on both. Deterministic for a given config (all
/// randomness derives from cfg.seed). epochs == 0 returns the freshly
/// initialised models, which is how callers snapshot the epoch-0 baseline.
TrainOutput train(std::span<const ImagePair> dataset, const TrainConfig& cfg);

/// Final-state checkpoint of a finished run.
Checkpoint make_checkpoint(TrainOutput& out, const TrainConfig& cfg);

/// Mean generator L1 distance to targets in normalised [-1, 1] space,
/// dropout disabled. The held-out quality metric.
double eval_l1(const UNetGenerator& gen, std::span<const ImagePair> pairs);

}  // namespace fgan::models
