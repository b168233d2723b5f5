#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "fgan/analytics.hpp"
#include "fgan/sim.hpp"

using namespace fgan;
using namespace fgan::sim;

namespace {

double flame_fraction(const SceneState& st) {
  const double burning = std::accumulate(st.flame.begin(), st.flame.end(), 0.0);
  return burning / static_cast<double>(st.flame.size());
}

double fraction_at_least(const SceneState& st, float temp) {
  std::size_t n = 0;
  for (float t : st.temperature) n += t >= temp;
  return static_cast<double>(n) / static_cast<double>(st.temperature.size());
}

double mean_temperature(const SceneState& st) {
  double acc = 0.0;
  for (float t : st.temperature) acc += t;
  return acc / static_cast<double>(st.temperature.size());
}

SceneState at_time(const ScenarioParams& p, double t) {
  SceneState st = initial_state(p);
  return t > 0 ? evolve(st, t, p) : st;
}

analytics::BandSeries truth_series(const ScenarioParams& p) {
  analytics::BandSeries series;
  for (int t = 0; t <= static_cast<int>(p.duration_sec); ++t) {
    series.push_back({static_cast<double>(t), truth_counts(at_time(p, t))});
  }
  return series;
}

double mean_luminance(const Image& img, const SceneState* st = nullptr,
                      bool skip_flame = false) {
  double acc = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (skip_flame && st && st->flame[static_cast<std::size_t>(y) * st->size + x]) continue;
      const auto rgb = img.rgb(x, y);
      acc += (rgb[0] + rgb[1] + rgb[2]) / 3.0;
      ++n;
    }
  }
  return acc / static_cast<double>(n);
}

}  // namespace

TEST_CASE("scenario params validation") {
  ScenarioParams p;
  p.validate();
  p.flashover_time_sec = 500.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.flashover_time_sec = 200.0;
  p.rollover_lead_sec = 250.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.rollover_lead_sec = 60.0;
  p.thermal_jitter = 25;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.thermal_jitter = 0;
  p.fps = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("flashover scenario trajectory") {
  ScenarioParams p;
  p.seed = 7;

  SUBCASE("initial state: little flame, no smoke layer") {
    const SceneState st = initial_state(p);
    CHECK(st.t_sec == 0.0);
    CHECK(flame_fraction(st) < 0.02);
    for (float s : st.smoke) CHECK(s == 0.0f);
  }
  SUBCASE("at flashover most of the frame exceeds 300F") {
    const SceneState st = at_time(p, *p.flashover_time_sec);
    CHECK(fraction_at_least(st, 300.0f) >= 0.8);
  }
  SUBCASE("flame area reaches at least 60% at flashover") {
    CHECK(flame_fraction(at_time(p, *p.flashover_time_sec)) >= 0.60);
  }
  SUBCASE("temperature and smoke stay within bounds") {
    for (double t : {0.0, 60.0, 140.0, 199.0, 200.0, 239.0}) {
      const SceneState st = at_time(p, t);
      for (float v : st.temperature) {
        CHECK(v >= 0.0f);
        CHECK(v <= 2000.0f);
      }
      for (float s : st.smoke) {
        CHECK(s >= 0.0f);
        CHECK(s <= 1.0f);
      }
    }
  }
  SUBCASE("mean temperature is nondecreasing up to flashover") {
    double prev = -1.0;
    for (int t = 0; t <= 200; t += 5) {
      const double m = mean_temperature(at_time(p, t));
      CHECK(m >= prev - 1.0);  // 1F tolerance per step
      prev = m;
    }
  }
  SUBCASE("rollover streaks appear in the lead window") {
    const SceneState before = at_time(p, *p.flashover_time_sec - p.rollover_lead_sec - 10);
    const SceneState during = at_time(p, *p.flashover_time_sec - 20);
    auto ceiling_red = [](const SceneState& st) {
      std::size_t n = 0;
      for (int y = 0; y < st.size / 8; ++y) {
        for (int x = 0; x < st.size; ++x) {
          const float t = st.temp_at(x, y);
          if (t >= 300.0f && t <= 500.0f && !st.flame[std::size_t(y) * st.size + x]) ++n;
        }
      }
      return n;
    };
    CHECK(ceiling_red(before) == 0);
    CHECK(ceiling_red(during) > 0);
  }
}

TEST_CASE("control scenario stays cool") {
  ScenarioParams p;
  p.flashover_time_sec.reset();
  p.seed = 11;
  for (int t = 0; t <= 240; t += 10) {
    const SceneState st = at_time(p, t);
    CHECK(fraction_at_least(st, 200.0f) < 0.15);
    CHECK(flame_fraction(st) < 0.10);
  }
}

TEST_CASE("render_thermal palette") {
  ScenarioParams p;
  p.thermal_jitter = 0;
  SceneState st = initial_state(p);

  SUBCASE("uniform 50F renders blue") {
    std::fill(st.temperature.begin(), st.temperature.end(), 50.0f);
    const Image img = render_thermal(st);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
      CHECK(img.pixels[i] == 0);
      CHECK(img.pixels[i + 1] == 0);
      CHECK(img.pixels[i + 2] == 255);
    }
  }
  SUBCASE("uniform 350F renders red") {
    std::fill(st.temperature.begin(), st.temperature.end(), 350.0f);
    const Image img = render_thermal(st);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
      CHECK(img.pixels[i] == 255);
      CHECK(img.pixels[i + 1] == 0);
      CHECK(img.pixels[i + 2] == 0);
    }
  }
  SUBCASE("100F sits in the green band (half-open boundary)") {
    std::fill(st.temperature.begin(), st.temperature.end(), 100.0f);
    const Image img = render_thermal(st);
    CHECK(img.rgb(0, 0)[1] == 255);
  }
}

TEST_CASE("rendered thermal frames classify back to the truth bands") {
  ScenarioParams p;
  p.seed = 13;  // jitter on (default 24)
  std::size_t pixels = 0, matches = 0;
  for (int t = 0; t <= 240; t += 20) {
    const SceneState st = at_time(p, t);
    const Image img = render_thermal(st);
    for (int y = 0; y < st.size; ++y) {
      for (int x = 0; x < st.size; ++x) {
        const auto rgb = img.rgb(x, y);
        const auto got = analytics::classify_pixel(rgb[0], rgb[1], rgb[2]);
        const auto want = analytics::band_of_temperature(st.temp_at(x, y));
        ++pixels;
        matches += got.has_value() && *got == want;
      }
    }
  }
  CHECK(static_cast<double>(matches) / pixels >= 0.999);
}

TEST_CASE("render_visual") {
  ScenarioParams p;
  p.seed = 17;

  SUBCASE("pre-fire scene is dark") {
    CHECK(mean_luminance(render_visual(initial_state(p))) < 80.0);
  }
  SUBCASE("flame pixels keep the red >= green >= blue ordering") {
    const SceneState st = at_time(p, 170.0);
    const Image img = render_visual(st);
    REQUIRE(flame_fraction(st) > 0.0);
    for (int y = 0; y < st.size; ++y) {
      for (int x = 0; x < st.size; ++x) {
        if (!st.flame[static_cast<std::size_t>(y) * st.size + x]) continue;
        const auto rgb = img.rgb(x, y);
        CHECK(rgb[0] >= rgb[1]);
        CHECK(rgb[1] >= rgb[2]);
      }
    }
  }
  SUBCASE("thicker smoke darkens the non-flame scene") {
    SceneState st = at_time(p, 120.0);
    const double base = mean_luminance(render_visual(st), &st, true);
    SceneState thicker = st;
    for (auto& s : thicker.smoke) s = std::min(1.0f, s + 0.3f);
    const double darker = mean_luminance(render_visual(thicker), &thicker, true);
    CHECK(darker < base);
  }
}

TEST_CASE("truth hot fraction is nondecreasing through the rollover window") {
  ScenarioParams p;
  p.seed = 41;
  double prev = -1.0;
  for (int t = 140; t <= 200; t += 2) {
    const double hf = analytics::hot_fraction(truth_counts(at_time(p, t)));
    CHECK(hf >= prev);
    prev = hf;
  }
}

TEST_CASE("hot-fraction rate peaks inside the rollover window") {
  ScenarioParams p;
  p.seed = 19;
  const auto series = truth_series(p);
  std::vector<double> t, hot;
  for (const auto& [ts, counts] : series) {
    t.push_back(ts);
    hot.push_back(analytics::hot_fraction(counts));
  }
  const auto rates = analytics::rate(t, hot);
  const std::size_t arg =
      std::distance(rates.begin(), std::max_element(rates.begin(), rates.end()));
  CHECK(t[arg] >= *p.flashover_time_sec - p.rollover_lead_sec);
  CHECK(t[arg] <= *p.flashover_time_sec);
}

TEST_CASE("detector end-to-end on simulator truth") {
  analytics::PredictorConfig cfg;

  SUBCASE("flashover scenario alerts at least 55 s early") {
    ScenarioParams p;
    p.seed = 23;
    const auto alert = analytics::detect(truth_series(p), cfg);
    REQUIRE(alert.has_value());
    const auto scored = analytics::evaluate(*alert, *p.flashover_time_sec);
    CHECK(*scored.lead_time_sec >= 55.0);
  }
  SUBCASE("control scenarios never alert") {
    for (std::uint64_t seed : {0ull, 1ull, 2ull}) {
      ScenarioParams p;
      p.flashover_time_sec.reset();
      p.seed = seed;
      CHECK_FALSE(analytics::detect(truth_series(p), cfg).has_value());
    }
  }
}

TEST_CASE("dataset generation") {
  ScenarioParams p;
  p.seed = 29;

  SUBCASE("default split is 30 train / 10 test over 40 pairs") {
    const Dataset ds = generate_dataset(p);
    REQUIRE(ds.frames.size() == 40);
    const auto tests = std::count(ds.is_test.begin(), ds.is_test.end(), true);
    CHECK(tests == 10);
    CHECK(ds.frames.front().t_sec == 0.0);
    CHECK(ds.frames.back().t_sec == doctest::Approx(234.0));
    for (const auto& f : ds.frames) {
      CHECK(f.visual.width == p.image_size);
      CHECK(f.truth.total == p.image_size * p.image_size);
    }
  }
  SUBCASE("same seed is byte-identical, different seed differs") {
    const Dataset a = generate_dataset(p, 8);
    const Dataset b = generate_dataset(p, 8);
    ScenarioParams q = p;
    q.seed = 31;
    const Dataset c = generate_dataset(q, 8);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
      CHECK(a.frames[i].visual.pixels == b.frames[i].visual.pixels);
      CHECK(a.frames[i].thermal.pixels == b.frames[i].thermal.pixels);
      any_diff |= a.frames[i].visual.pixels != c.frames[i].visual.pixels;
    }
    CHECK(any_diff);
  }
}

TEST_CASE("dataset on disk with manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "fgan_sim_test" / "ds";
  std::filesystem::remove_all(dir);
  ScenarioParams p;
  p.seed = 37;
  const Dataset ds = generate_dataset(p, 12);
  write_dataset(ds, dir);

  const auto entries = read_manifest(dir);
  REQUIRE(entries.size() == 12);
  int tests = 0;
  for (const auto& e : entries) {
    CHECK(std::filesystem::exists(dir / e.visual));
    CHECK(std::filesystem::exists(dir / e.thermal));
    tests += e.is_test;
    const auto parsed = parse_frame_time(e.visual);
    REQUIRE(parsed.has_value());
    CHECK(*parsed == doctest::Approx(e.t_sec));
  }
  CHECK(tests == 3);
  CHECK_FALSE(parse_frame_time("not_a_frame.ppm").has_value());
}
