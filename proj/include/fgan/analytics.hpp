#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgan/errors.hpp"
#include "fgan/image.hpp"

namespace fgan::analytics {

/// Thermal palette bands, hottest first. The order doubles as the
/// classification tie-break: equidistant pixels go to the hotter band.
enum class Band { Red, Yellow, Green, Blue };

/// Palette anchors: Red (255,0,0) for 300-500F, Yellow (255,255,0) for
/// 200-300F, Green (0,255,0) for 100-200F, Blue (0,0,255) for 0-100F.
inline constexpr std::array<std::array<std::uint8_t, 3>, 4> kBandAnchors = {{
    {255, 0, 0},
    {255, 255, 0},
    {0, 255, 0},
    {0, 0, 255},
}};

/// Pixels darker than this (max channel) count as background, not as a band.
inline constexpr int kBackgroundFloor = 32;

/// Band intervals are half-open [lo, hi); the top band is closed at 500 and
/// clamps everything hotter.
Band band_of_temperature(double fahrenheit);

const char* band_name(Band b);

enum class CountMode { NearestAnchor, ChannelSum };

CountMode parse_count_mode(const std::string& name);  // "nearest_anchor" | "channel_sum"
const char* count_mode_name(CountMode mode);

struct BandCounts {
  std::int64_t red = 0, yellow = 0, green = 0, blue = 0;
  std::int64_t background = 0;
  std::int64_t total = 0;
  // Fractional sums; channel_sum keeps its exact values here while the
  // integer fields above hold rounded projections. nearest_anchor mirrors
  // the integers.
  double red_f = 0, yellow_f = 0, green_f = 0, blue_f = 0;
};

/// Nearest-anchor label for one pixel; nullopt means background (below the
/// luminance floor). channel_sum mode has no per-pixel labels -- see
/// count_bands.
std::optional<Band> classify_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b);

BandCounts count_bands(const Image& image, CountMode mode);

/// (red + yellow) / (total - background); all-background frames have no
/// defined value and throw DataError.
double hot_fraction(const BandCounts& counts);

/// Trailing moving average over min(window, samples so far); output length
/// equals input length.
std::vector<double> smooth(std::span<const double> series, int window);

/// Backward finite difference d(value)/dt; the first sample's rate is 0.
/// Timestamps must be strictly increasing.
std::vector<double> rate(std::span<const double> t, std::span<const double> value);

struct TimedCounts {
  double t_sec = 0;
  BandCounts counts;
};
using BandSeries = std::vector<TimedCounts>;

struct PredictorConfig {
  int window = 5;          // smoothing samples
  double theta = 0.004;    // hot-fraction rise per second
  int consecutive = 3;     // qualifying samples required
  double warmup_sec = 20.0;

  void validate() const;
};

struct FlashoverAlert {
  double alert_time_sec = 0;
  double observed_rate = 0;
  double hot_fraction_at_alert = 0;  // smoothed value the detector saw
  std::optional<double> lead_time_sec;
};

/// First time >= warmup_sec where the smoothed hot-fraction rate stays >=
/// theta for `consecutive` samples; the alert carries the time of the sample
/// that completes the run. At most one alert per series. Throws DataError
/// when the series is shorter than window + consecutive.
std::optional<FlashoverAlert> detect(const BandSeries& series, const PredictorConfig& config);

/// detect() over a pre-extracted (t, hot_fraction) series; what `predict`
/// runs on CSV rows.
std::optional<FlashoverAlert> detect_values(std::span<const double> t,
                                            std::span<const double> hot_fraction,
                                            const PredictorConfig& config);

/// Fills lead_time_sec = ground_truth - alert_time (negative when late).
FlashoverAlert evaluate(FlashoverAlert alert, double ground_truth_flashover_sec);

/// CSV report. Header is exactly
/// `t_sec,red,yellow,green,blue,background,total,hot_fraction,hot_rate`;
/// floats carry 6 significant digits. hot_rate is the smoothed-rate column
/// under `config`.
std::string render_report_csv(const BandSeries& series, const PredictorConfig& config = {});
void write_report_csv(const BandSeries& series, const std::filesystem::path& path,
                      const PredictorConfig& config = {});

struct ReportRow {
  double t_sec = 0;
  BandCounts counts;
  double hot_fraction = 0;
  double hot_rate = 0;
};

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

/// Alert JSON: {"alert_time_sec", "observed_rate", "hot_fraction_at_alert",
/// "lead_time_sec" (nullable), "config": {...}}. Fields are null when no
/// alert fired.
std::string alert_json(const std::optional<FlashoverAlert>& alert,
                       const PredictorConfig& config);

}  // namespace fgan::analytics
