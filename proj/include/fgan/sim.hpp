#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fgan/analytics.hpp"
#include "fgan/image.hpp"

namespace fgan::sim {

/// Procedural compartment-fire scenario. Everything is a pure function of
/// (params, t), so frames are deterministic and reproducible by seed.
struct ScenarioParams {
  double duration_sec = 240.0;
  int fps = 1;
  /// Ground-truth flashover instant; nullopt is a control scenario that
  /// plateaus without flashing over.
  std::optional<double> flashover_time_sec = 200.0;
  int image_size = 64;
  std::uint64_t seed = 0;
  int fire_origin_x = -1;  // -1 derives from image_size
  int fire_origin_y = -1;
  double growth_rate = 0.05;       // logistic rate of flame-area growth, 1/s
  double rollover_lead_sec = 60.0;  // ceiling streaks start this long before flashover
  int thermal_jitter = 24;          // palette jitter amplitude, 0..24

  void validate() const;
};

/// Instantaneous scene on the image grid. Temperatures are Fahrenheit in
/// [0, 2000]; smoke density is [0, 1]; the flame mask marks burning pixels.
struct SceneState {
  double t_sec = 0;
  int size = 0;
  std::vector<float> temperature;   // size*size, row-major
  std::vector<float> smoke;         // density
  std::vector<std::uint8_t> flame;  // mask

  struct Rect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  };
  Rect table, sofa;

  // Rendering inputs carried with the state.
  std::uint64_t noise_seed = 0;
  int thermal_jitter = 24;

  float temp_at(int x, int y) const { return temperature[static_cast<std::size_t>(y) * size + x]; }
};

SceneState initial_state(const ScenarioParams& params);

/// Advances the scene by dt_sec (> 0).
SceneState evolve(const SceneState& state, double dt_sec, const ScenarioParams& params);

/// Palette-anchor thermal rendering with seeded per-pixel jitter (bounded so
/// nearest-anchor classification always recovers the band).
Image render_thermal(const SceneState& state);

/// Dark body-camera-style view: furniture blocks, flame with flicker, smoke
/// veil that darkens the scene as it thickens.
Image render_visual(const SceneState& state);

/// Band counts straight from the temperature field (no rendering involved).
analytics::BandCounts truth_counts(const SceneState& state);

struct PairedFrame {
  double t_sec = 0;
  Image visual;
  Image thermal;
  analytics::BandCounts truth;
};

struct Dataset {
  std::vector<PairedFrame> frames;
  std::vector<bool> is_test;  // chronological interleave: every 4th frame
};

/// n_frames sampled evenly across the duration at the params' fps grid,
/// split 3:1 train:test by chronological interleave (40 frames -> 30/10).
Dataset generate_dataset(const ScenarioParams& params, int n_frames = 40);

struct ManifestEntry {
  double t_sec = 0;
  std::string visual;   // relative path
  std::string thermal;  // relative path
  bool is_test = false;
  analytics::BandCounts truth;
};

/// Writes frames as PPMs plus manifest.jsonl (one JSON object per line with
/// t_sec, visual, thermal, split and truth_counts).
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);

/// Frame file stem for a timestamp, e.g. "visual_t000006000" (milliseconds).
std::string frame_stem(const char* kind, double t_sec);

/// Timestamp encoded by frame_stem-style names; nullopt when the name does
/// not match.
std::optional<double> parse_frame_time(const std::string& filename);

}  // namespace fgan::sim
