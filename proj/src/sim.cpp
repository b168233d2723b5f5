#include "fgan/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "fgan/ppm.hpp"
#include "fgan/rng.hpp"

namespace fgan::sim {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Logistic ramp pinned to exactly 0 at t = 0 and approaching `peak`.
double ramp(double t, double peak, double rate, double mid) {
  const double floor0 = logistic(-rate * mid);
  return peak * (logistic(rate * (t - mid)) - floor0) / (1.0 - floor0);
}

struct Model {
  // trajectory knobs derived from ScenarioParams
  int size = 0;
  double flame_peak = 0, flame_rate = 0, flame_mid = 0;
  double smoke_depth_peak = 0, smoke_depth_rate = 0, smoke_depth_mid = 0;
  double smoke_dens_peak = 0, smoke_dens_rate = 0, smoke_dens_mid = 0;
  double layer_base_start = 90.0;
  double layer_base_prefire = 0;  // value reached when rollover begins
  double ambient_gain = 0;
  std::optional<double> t_fo;
  double rollover_start = 0;

  std::vector<int> flame_order;  // pixel indices, hottest-first growth order
  std::vector<float> flame_shape;  // normalised distance field
};

Model build_model(const ScenarioParams& p) {
  Model m;
  m.size = p.image_size;
  const int W = p.image_size, H = p.image_size;
  m.t_fo = p.flashover_time_sec;

  if (m.t_fo) {
    const double t_fo = *m.t_fo;
    m.flame_peak = 0.78;
    m.flame_rate = p.growth_rate;
    m.flame_mid = t_fo - 30.0;
    m.rollover_start = t_fo - p.rollover_lead_sec;
    m.smoke_depth_peak = 0.85;
    m.smoke_depth_rate = 0.035;
    m.smoke_depth_mid = t_fo - 80.0;
    m.smoke_dens_peak = 0.95;
    m.smoke_dens_rate = 0.04;
    m.smoke_dens_mid = t_fo - 70.0;
    m.layer_base_prefire = 175.0;
    m.ambient_gain = 60.0;
  } else {
    m.flame_peak = 0.06;
    m.flame_rate = p.growth_rate;
    m.flame_mid = 60.0;
    m.smoke_depth_peak = 0.30;
    m.smoke_depth_rate = 0.05;
    m.smoke_depth_mid = 70.0;
    m.smoke_dens_peak = 0.40;
    m.smoke_dens_rate = 0.05;
    m.smoke_dens_mid = 70.0;
    m.ambient_gain = 22.0;
  }

  const double ox = p.fire_origin_x >= 0 ? p.fire_origin_x : 0.45 * W;
  const double oy = p.fire_origin_y >= 0 ? p.fire_origin_y : 0.78 * H;

  // Fixed per-scenario growth order: pixels ignite by noisy elliptic distance
  // from the origin, so the flame is a ragged blob whose area tracks the
  // logistic exactly.
  m.flame_shape.resize(static_cast<std::size_t>(W) * H);
  const std::uint64_t shape_tag = hash_label("flame-shape");
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double dx = (x - ox);
      const double dy = (y - oy) / 1.6;  // flames stretch upward
      const double noise = hash_unit(p.seed, shape_tag, y * W + x);
      m.flame_shape[static_cast<std::size_t>(y) * W + x] =
          static_cast<float>(std::sqrt(dx * dx + dy * dy) * (0.85 + 0.3 * noise));
    }
  }
  m.flame_order.resize(m.flame_shape.size());
  std::iota(m.flame_order.begin(), m.flame_order.end(), 0);
  std::stable_sort(m.flame_order.begin(), m.flame_order.end(),
                   [&](int a, int b) { return m.flame_shape[a] < m.flame_shape[b]; });
  return m;
}

SceneState state_at(const ScenarioParams& p, double t) {
  const Model m = build_model(p);
  const int W = p.image_size, H = p.image_size;
  const std::size_t N = static_cast<std::size_t>(W) * H;

  SceneState st;
  st.t_sec = t;
  st.size = W;
  st.noise_seed = p.seed;
  st.thermal_jitter = p.thermal_jitter;
  st.temperature.assign(N, 0.0f);
  st.smoke.assign(N, 0.0f);
  st.flame.assign(N, 0);
  st.table = {int(0.56 * W), int(0.58 * H), int(0.84 * W), int(0.70 * H)};
  st.sofa = {int(0.08 * W), int(0.52 * H), int(0.36 * W), int(0.76 * H)};

  const bool flashed = m.t_fo && t >= *m.t_fo;

  // Ambient heat builds slowly toward flashover.
  const double amb = m.t_fo ? 68.0 + m.ambient_gain * std::min(1.0, t / *m.t_fo)
                            : 68.0 + ramp(t, m.ambient_gain, 0.05, 70.0);
  for (auto& v : st.temperature) v = static_cast<float>(amb);

  // Hot smoke layer descending from the ceiling.
  const double depth_frac = ramp(t, m.smoke_depth_peak, m.smoke_depth_rate, m.smoke_depth_mid);
  const double dens_peak = ramp(t, m.smoke_dens_peak, m.smoke_dens_rate, m.smoke_dens_mid);
  const double y_s = depth_frac * H;
  double layer_base;
  if (!m.t_fo) {
    layer_base = m.layer_base_start + ramp(t, 30.0, 0.05, 70.0);
  } else if (t < m.rollover_start) {
    layer_base = m.layer_base_start +
                 (m.layer_base_prefire - m.layer_base_start) *
                     (m.rollover_start > 0 ? std::min(1.0, t / m.rollover_start) : 1.0);
  } else {
    const double phase = std::min(1.0, (t - m.rollover_start) /
                                           std::max(1e-9, *m.t_fo - m.rollover_start));
    layer_base = m.layer_base_prefire + (295.0 - m.layer_base_prefire) * phase;
  }
  const std::uint64_t speckle_tag = hash_label("smoke-speckle");
  if (y_s >= 1.0) {
    for (int y = 0; y < static_cast<int>(std::min<double>(H, y_s)); ++y) {
      const double rel = y / y_s;
      const float t_layer = static_cast<float>(layer_base * (1.0 - 0.45 * rel));
      for (int x = 0; x < W; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * W + x;
        st.temperature[i] = std::max(st.temperature[i], t_layer);
        const double speckle = 0.85 + 0.3 * hash_unit(p.seed, speckle_tag, i);
        st.smoke[i] = static_cast<float>(
            std::clamp(dens_peak * (0.35 + 0.65 * (1.0 - rel)) * speckle, 0.0, 1.0));
      }
    }
  }

  // Rollover: hot finger streaks crawling along the ceiling ahead of
  // flashover (they stay once formed).
  if (m.t_fo && t >= m.rollover_start) {
    const double phase = std::min(1.0, (t - m.rollover_start) /
                                           std::max(1e-9, *m.t_fo - m.rollover_start));
    const double ox = p.fire_origin_x >= 0 ? p.fire_origin_x : 0.45 * W;
    const int thickness = std::max(1, H / 40) + 1;
    const int row_step = std::max(2, H / 20);
    const std::uint64_t finger_tag = hash_label("finger-heat");
    for (int f = 0; f < 3; ++f) {
      const double ragged = 0.8 + 0.4 * hash_unit(p.seed, hash_label("finger-extent"), f);
      const double reach = phase * 0.65 * W * ragged;
      const int y0 = 1 + f * row_step;
      for (int y = y0; y < std::min(H, y0 + thickness); ++y) {
        for (int x = 0; x < W; ++x) {
          if (std::abs(x - ox) > reach) continue;
          const std::size_t i = static_cast<std::size_t>(y) * W + x;
          const float t_finger =
              static_cast<float>(340.0 + 140.0 * hash_unit(p.seed, finger_tag, i));
          st.temperature[i] = std::max(st.temperature[i], t_finger);
        }
      }
    }
  }

  // Flame blob: exactly round(area * N) pixels, ignited in fixed order.
  const double area = ramp(t, m.flame_peak, m.flame_rate, m.flame_mid);
  const int burning = static_cast<int>(std::llround(area * static_cast<double>(N)));
  for (int q = 0; q < burning; ++q) {
    const std::size_t i = static_cast<std::size_t>(m.flame_order[q]);
    st.flame[i] = 1;
    const double heat = 1.0 - static_cast<double>(q) / std::max(1, burning);
    st.temperature[i] =
        std::max(st.temperature[i], static_cast<float>(650.0 + 850.0 * heat));
  }

  // Flashover: the whole compartment ignites.
  if (flashed) {
    const std::uint64_t flash_tag = hash_label("flashover");
    for (std::size_t i = 0; i < N; ++i) {
      const float t_flash =
          static_cast<float>(320.0 + 580.0 * hash_unit(p.seed, flash_tag, i));
      st.temperature[i] = std::max(st.temperature[i], t_flash);
    }
  }

  for (auto& v : st.temperature) v = std::clamp(v, 0.0f, 2000.0f);
  return st;
}

}  // namespace

void ScenarioParams::validate() const {
  if (duration_sec <= 0) throw ConfigError("duration_sec must be > 0");
  if (fps < 1) throw ConfigError("fps must be >= 1");
  if (image_size < 16) throw ConfigError("image_size must be >= 16");
  if (growth_rate <= 0) throw ConfigError("growth_rate must be > 0");
  if (thermal_jitter < 0 || thermal_jitter > 24) {
    throw ConfigError("thermal_jitter must be in [0, 24] to keep bands recoverable");
  }
  if (flashover_time_sec) {
    if (*flashover_time_sec <= 0 || *flashover_time_sec > duration_sec) {
      throw ConfigError("flashover_time_sec must be in (0, duration_sec]");
    }
    if (rollover_lead_sec < 0 || rollover_lead_sec >= *flashover_time_sec) {
      throw ConfigError("rollover_lead_sec must sit inside (0, flashover_time_sec)");
    }
  }
  if (fire_origin_x >= image_size || fire_origin_y >= image_size) {
    throw ConfigError("fire origin outside the image grid");
  }
}

SceneState initial_state(const ScenarioParams& params) {
  params.validate();
  return state_at(params, 0.0);
}

SceneState evolve(const SceneState& state, double dt_sec, const ScenarioParams& params) {
  if (!(dt_sec > 0)) throw ConfigError("evolve needs dt_sec > 0");
  params.validate();
  return state_at(params, state.t_sec + dt_sec);
}

Image render_thermal(const SceneState& state) {
  Image img(state.size, state.size);
  const int amp = state.thermal_jitter;
  const std::uint64_t tick = static_cast<std::uint64_t>(std::llround(state.t_sec * 1000.0));
  const std::uint64_t jitter_tag = hash_label("thermal-jitter");
  for (int y = 0; y < state.size; ++y) {
    for (int x = 0; x < state.size; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * state.size + x;
      const auto band = analytics::band_of_temperature(state.temperature[i]);
      const auto& anchor = analytics::kBandAnchors[static_cast<std::size_t>(band)];
      std::uint8_t rgb[3];
      for (int c = 0; c < 3; ++c) {
        int v = anchor[c];
        if (amp > 0) {
          const double u = hash_unit(state.noise_seed, jitter_tag, tick, i * 3 + c);
          v += static_cast<int>(std::floor(u * (2 * amp + 1))) - amp;
        }
        rgb[c] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
      img.set(x, y, rgb[0], rgb[1], rgb[2]);
    }
  }
  return img;
}

Image render_visual(const SceneState& state) {
  const int W = state.size, H = state.size;
  Image img(W, H);
  const std::uint64_t tick = static_cast<std::uint64_t>(std::llround(state.t_sec * 1000.0));
  const std::uint64_t grain_tag = hash_label("visual-grain");
  const std::uint64_t flicker_tag = hash_label("flicker");
  const std::uint64_t glow_tag = hash_label("flash-glow");

  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      double r, g, b;
      if (y >= static_cast<int>(0.82 * H)) {
        r = 34, g = 30, b = 26;  // floor
      } else {
        r = 26, g = 24, b = 22;  // wall
      }
      if (state.table.contains(x, y)) r = 96, g = 72, b = 48;
      if (state.sofa.contains(x, y)) r = 70, g = 58, b = 66;
      const double grain = hash_unit(state.noise_seed, grain_tag, i);
      r += grain * 8.0 - 4.0;
      g += grain * 8.0 - 4.0;
      b += grain * 8.0 - 4.0;

      if (state.flame[i]) {
        // Orange-white core scaled by temperature; flicker on the green channel.
        const double heat = std::clamp((state.temperature[i] - 650.0) / 850.0, 0.0, 1.0);
        const double flick = (hash_unit(state.noise_seed, flicker_tag, tick, i) - 0.5) * 40.0;
        r = 255.0;
        g = std::clamp(120.0 + 115.0 * heat + flick, 0.0, 255.0);
        b = 30.0 + 90.0 * heat;
        g = std::min(g, r);
        b = std::min(b, g);
      } else {
        // Smoke: a dark gray veil; thicker smoke swallows more light.
        const double s = state.smoke[i];
        const double k = 0.85 * s;
        r = r * (1.0 - k) + 16.0 * k;
        g = g * (1.0 - k) + 15.0 * k;
        b = b * (1.0 - k) + 14.0 * k;
        // Rollover glow shines through near the ceiling.
        if (state.temperature[i] >= 300.0f && y < H / 4) {
          r = r * 0.45 + 230.0 * 0.55;
          g = g * 0.45 + 150.0 * 0.55;
          b = b * 0.45 + 60.0 * 0.55;
        } else if (state.temperature[i] >= 310.0f) {
          // Flashover wash outside the flame core.
          const double glow = 0.6 + 0.2 * hash_unit(state.noise_seed, glow_tag, i);
          r = r * (1.0 - glow) + 250.0 * glow;
          g = g * (1.0 - glow) + 160.0 * glow;
          b = b * (1.0 - glow) + 60.0 * glow;
        }
      }
      img.set(x, y, static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0)),
              static_cast<std::uint8_t>(std::clamp(g, 0.0, 255.0)),
              static_cast<std::uint8_t>(std::clamp(b, 0.0, 255.0)));
    }
  }
  return img;
}

analytics::BandCounts truth_counts(const SceneState& state) {
  analytics::BandCounts c;
  c.total = static_cast<std::int64_t>(state.size) * state.size;
  for (float t : state.temperature) {
    switch (analytics::band_of_temperature(t)) {
      case analytics::Band::Red: ++c.red; break;
      case analytics::Band::Yellow: ++c.yellow; break;
      case analytics::Band::Green: ++c.green; break;
      case analytics::Band::Blue: ++c.blue; break;
    }
  }
  c.red_f = static_cast<double>(c.red);
  c.yellow_f = static_cast<double>(c.yellow);
  c.green_f = static_cast<double>(c.green);
  c.blue_f = static_cast<double>(c.blue);
  return c;
}

Dataset generate_dataset(const ScenarioParams& params, int n_frames) {
  params.validate();
  if (n_frames < 1) throw ConfigError("n_frames must be >= 1");
  const double total_ticks = params.duration_sec * params.fps;

  Dataset ds;
  ds.frames.reserve(n_frames);
  for (int k = 0; k < n_frames; ++k) {
    const double tick = std::floor(k * total_ticks / n_frames);
    const double t = tick / params.fps;
    SceneState st = state_at(params, t);
    PairedFrame frame;
    frame.t_sec = t;
    frame.visual = render_visual(st);
    frame.thermal = render_thermal(st);
    frame.truth = truth_counts(st);
    ds.frames.push_back(std::move(frame));
    ds.is_test.push_back(k % 4 == 3);
  }
  return ds;
}

std::string frame_stem(const char* kind, double t_sec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_t%09lld", kind,
                static_cast<long long>(std::llround(t_sec * 1000.0)));
  return buf;
}

std::optional<double> parse_frame_time(const std::string& filename) {
  const auto dot = filename.rfind('.');
  const std::string stem = dot == std::string::npos ? filename : filename.substr(0, dot);
  const auto pos = stem.rfind("_t");
  if (pos == std::string::npos) return std::nullopt;
  const std::string digits = stem.substr(pos + 2);
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
    return std::nullopt;
  }
  return std::stod(digits) / 1000.0;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::ofstream manifest(dir / "manifest.jsonl", std::ios::binary | std::ios::trunc);
  if (!manifest) throw IoError("cannot open manifest in " + dir.string());
  for (std::size_t k = 0; k < dataset.frames.size(); ++k) {
    const auto& frame = dataset.frames[k];
    const std::string visual_name = frame_stem("visual", frame.t_sec) + ".ppm";
    const std::string thermal_name = frame_stem("thermal", frame.t_sec) + ".ppm";
    write_ppm(frame.visual, dir / visual_name);
    write_ppm(frame.thermal, dir / thermal_name);
    nlohmann::json line = {
        {"t_sec", frame.t_sec},
        {"visual", visual_name},
        {"thermal", thermal_name},
        {"split", dataset.is_test[k] ? "test" : "train"},
        {"truth_counts",
         {{"red", frame.truth.red},
          {"yellow", frame.truth.yellow},
          {"green", frame.truth.green},
          {"blue", frame.truth.blue},
          {"background", frame.truth.background}}},
    };
    manifest << line.dump() << '\n';
  }
  if (!manifest) throw IoError("manifest write failed in " + dir.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.jsonl";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.t_sec = j.at("t_sec").get<double>();
      e.visual = j.at("visual").get<std::string>();
      e.thermal = j.at("thermal").get<std::string>();
      e.is_test = j.at("split").get<std::string>() == "test";
      const auto& tc = j.at("truth_counts");
      e.truth.red = tc.at("red").get<std::int64_t>();
      e.truth.yellow = tc.at("yellow").get<std::int64_t>();
      e.truth.green = tc.at("green").get<std::int64_t>();
      e.truth.blue = tc.at("blue").get<std::int64_t>();
      e.truth.background = tc.at("background").get<std::int64_t>();
      e.truth.total = e.truth.red + e.truth.yellow + e.truth.green + e.truth.blue +
                      e.truth.background;
      e.truth.red_f = static_cast<double>(e.truth.red);
      e.truth.yellow_f = static_cast<double>(e.truth.yellow);
      e.truth.green_f = static_cast<double>(e.truth.green);
      e.truth.blue_f = static_cast<double>(e.truth.blue);
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError("manifest line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return entries;
}

}  // namespace fgan::sim
