#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "fgan/analytics.hpp"

namespace fgan {

struct E2eParams {
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  int epochs = 200;
  int frames = 40;
  int image_size = 64;
  std::optional<double> flashover_at = 200.0;
  double duration_sec = 240.0;
  int fps = 1;
  float lr = 2e-4f;
  float lambda_l1 = 100.0f;
  analytics::PredictorConfig predictor;
};

inline constexpr int kE2eOk = 0;
inline constexpr int kE2eTrainingDiverged = 2;
inline constexpr int kE2eNoAlert = 3;
inline constexpr int kE2eIoFailure = 4;

struct E2eResult {
  int exit_code = kE2eOk;
  std::optional<double> alert_time_sec;
  std::optional<double> lead_time_sec;
  std::filesystem::path summary_path;
};

/// Full pipeline: simulate a paired dataset, train on the 30 training pairs,
/// enhance the 10 held-out visual frames, count bands on the generated
/// thermal frames, and run the flashover detector. Writes dataset/,
/// model.fgan, enhanced/, report.csv, alert.json and summary.json under
/// out_dir. Deterministic per seed.
E2eResult run_e2e(const E2eParams& params);

}  // namespace fgan
