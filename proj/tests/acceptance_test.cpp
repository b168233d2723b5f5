// Acceptance suite: one test case per pipeline-level criterion, each printing
// a PASS/FAIL line. Heavyweight artifacts (the trained model) are built once
// and shared across criteria.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

#include "fgan/analytics.hpp"
#include "fgan/checkpoint.hpp"
#include "fgan/e2e.hpp"
#include "fgan/gradcheck.hpp"
#include "fgan/models.hpp"
#include "fgan/ops.hpp"
#include "fgan/probe.hpp"
#include "fgan/sim.hpp"
#include "fgan/train.hpp"
#include "support.hpp"

using namespace fgan;
using ad::Tensor;
using testsup::rand_tensor;

namespace {

void report(int criterion, const char* what, bool pass, const std::string& detail) {
  std::printf("criterion %d (%s): %s%s%s\n", criterion, what, pass ? "PASS" : "FAIL",
              detail.empty() ? "" : " | ", detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::filesystem::path work_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "fgan_acceptance" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

// ---------------------------------------------------------------------------
// Shared training run: the paper-scale dataset (40 pairs, 30/10 split) and a
// full-length training, reused by the fidelity/latency/persistence criteria.
// ---------------------------------------------------------------------------

struct TrainedBundle {
  sim::ScenarioParams scenario;
  sim::Dataset dataset;
  std::vector<models::ImagePair> train_pairs;
  std::vector<const sim::PairedFrame*> test_frames;
  models::TrainConfig cfg;
  models::TrainOutput epoch0;
  models::TrainOutput trained;
  double train_seconds = 0;
  double l1_epoch0 = 0;
  double l1_final = 0;
};

TrainedBundle make_bundle() {
  sim::ScenarioParams scenario;
  scenario.seed = 1;
  models::TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 1;

  sim::Dataset dataset = sim::generate_dataset(scenario, 40);
  std::vector<models::ImagePair> train_pairs;
  std::vector<const sim::PairedFrame*> test_frames;
  for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
    if (dataset.is_test[i]) {
      test_frames.push_back(&dataset.frames[i]);
    } else {
      train_pairs.push_back({dataset.frames[i].visual, dataset.frames[i].thermal});
    }
  }

  models::TrainConfig zero = cfg;
  zero.epochs = 0;
  models::TrainOutput epoch0 = models::train(train_pairs, zero);

  const auto start = std::chrono::steady_clock::now();
  models::TrainOutput trained = models::train(train_pairs, cfg);
  const double train_seconds = seconds_since(start);

  std::vector<models::ImagePair> holdout;
  for (const auto* f : test_frames) holdout.push_back({f->visual, f->thermal});
  const double l1_epoch0 = models::eval_l1(epoch0.generator, holdout);
  const double l1_final = models::eval_l1(trained.generator, holdout);

  // test_frames point into dataset.frames; the vector move below keeps the
  // underlying storage alive.
  return TrainedBundle{scenario,
                       std::move(dataset),
                       std::move(train_pairs),
                       std::move(test_frames),
                       cfg,
                       std::move(epoch0),
                       std::move(trained),
                       train_seconds,
                       l1_epoch0,
                       l1_final};
}

TrainedBundle& bundle() {
  static TrainedBundle b = make_bundle();
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------

TEST_CASE("criterion 1: gradient correctness per layer and full losses") {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2024);

  // Two conditioning devices keep the finite-difference oracle meaningful on
  // float32: a small linear anchor (+0.02 * sum(input)) floors gradient
  // elements that would otherwise cancel toward zero, and the step 1e-2 sits
  // at the f32 sweet spot where final-rounding noise (ULP(f)/2h) and
  // truncation error are both far below the tolerances.
  constexpr float kStep = 1e-2f;
  auto anchored = [](std::function<Tensor(const Tensor&)> fn) {
    return [fn = std::move(fn)](const Tensor& t) {
      return ad::add(fn(t), ad::scale(ad::sum(t), 0.02f));
    };
  };

  struct Check {
    std::string name;
    Tensor input;
    std::function<Tensor(const Tensor&)> fn;
    float step = kStep;
  };
  std::vector<Check> checks;

  // conv2d: input, weight, and bias positions.
  {
    Tensor x = rand_tensor({1, 2, 8, 8}, rng);
    Tensor w = rand_tensor({3, 2, 4, 4}, rng, -0.4f, 0.4f);
    Tensor b = rand_tensor({3}, rng, -0.1f, 0.1f);
    checks.push_back({"conv2d/input", x,
                      anchored([=](const Tensor& t) { return ad::mean(ad::conv2d(t, w, b, 2, 1)); })});
    checks.push_back({"conv2d/weight", w,
                      anchored([=](const Tensor& t) { return ad::mean(ad::conv2d(x, t, b, 2, 1)); })});
    checks.push_back({"conv2d/bias", b,
                      anchored([=](const Tensor& t) { return ad::mean(ad::conv2d(x, w, t, 2, 1)); })});
  }
  // conv_transpose2d: input and weight.
  {
    Tensor x = rand_tensor({1, 3, 4, 4}, rng);
    Tensor w = rand_tensor({3, 2, 4, 4}, rng, -0.4f, 0.4f);
    Tensor b = rand_tensor({2}, rng, -0.1f, 0.1f);
    checks.push_back(
        {"conv_transpose2d/input", x,
         anchored([=](const Tensor& t) { return ad::mean(ad::conv_transpose2d(t, w, b, 2, 1)); })});
    checks.push_back(
        {"conv_transpose2d/weight", w,
         anchored([=](const Tensor& t) { return ad::mean(ad::conv_transpose2d(x, t, b, 2, 1)); })});
  }
  // instance_norm: input, gamma, beta.
  {
    Tensor x = rand_tensor({1, 3, 8, 8}, rng);
    Tensor gamma = rand_tensor({3}, rng, 0.7f, 1.3f);
    Tensor beta = rand_tensor({3}, rng, -0.3f, 0.3f);
    Tensor coef = rand_tensor({1, 3, 8, 8}, rng, 0.5f, 1.5f);
    auto weighted = [coef](const Tensor& n) { return ad::mean(ad::mul(n, coef)); };
    checks.push_back({"instance_norm/input", x, anchored([=](const Tensor& t) {
                        return weighted(ad::instance_norm(t, gamma, beta, 1e-5f));
                      })});
    checks.push_back({"instance_norm/gamma", gamma, anchored([=](const Tensor& t) {
                        return weighted(ad::instance_norm(x, t, beta, 1e-5f));
                      })});
    checks.push_back({"instance_norm/beta", beta, anchored([=](const Tensor& t) {
                        return weighted(ad::instance_norm(x, gamma, t, 1e-5f));
                      })});
  }
  // activations; inputs nudged off the relu-family kinks.
  for (auto [kind, name] : {std::pair{ad::Act::LeakyRelu, "activation/leaky_relu"},
                            std::pair{ad::Act::Relu, "activation/relu"},
                            std::pair{ad::Act::Tanh, "activation/tanh"},
                            std::pair{ad::Act::Sigmoid, "activation/sigmoid"}}) {
    Tensor x = rand_tensor({1, 2, 8, 8}, rng);
    testsup::avoid_kinks(x, 0.05f);
    Tensor coef = rand_tensor({1, 2, 8, 8}, rng, 0.5f, 1.5f);
    checks.push_back({name, x, anchored([=, k = kind](const Tensor& t) {
                        return ad::mean(ad::mul(ad::activation(t, k), coef));
                      })});
  }
  // concat_channels through both halves.
  {
    Tensor a = rand_tensor({1, 2, 8, 8}, rng);
    Tensor bb = rand_tensor({1, 1, 8, 8}, rng);
    Tensor coef = rand_tensor({1, 3, 8, 8}, rng, 0.5f, 1.5f);
    checks.push_back({"concat_channels/lhs", a, anchored([=](const Tensor& t) {
                        return ad::mean(ad::mul(ad::concat_channels(t, bb), coef));
                      })});
    checks.push_back({"concat_channels/rhs", bb, anchored([=](const Tensor& t) {
                        return ad::mean(ad::mul(ad::concat_channels(a, t), coef));
                      })});
  }
  // dropout with a deterministic mask (fresh identically-seeded rng per call).
  {
    Tensor x = rand_tensor({1, 2, 8, 8}, rng);
    checks.push_back({"dropout", x, anchored([](const Tensor& t) {
                        Rng mask_rng(77);
                        return ad::mean(ad::dropout(t, 0.5f, true, mask_rng));
                      })});
  }
  // losses.
  {
    Tensor z = rand_tensor({1, 1, 8, 8}, rng, -2.0f, 2.0f);
    checks.push_back({"bce_with_logits", z, anchored([](const Tensor& t) {
                        return ad::bce_with_logits(t, 1.0f);
                      })});
    Tensor a = rand_tensor({1, 3, 8, 8}, rng);
    // Keep |a - target| clear of the step so no element crosses the |.| kink
    // inside the central-difference interval.
    Tensor target = a.detached();
    for (auto& v : target.data) {
      const double off = rng.uniform(0.1, 0.6);
      v += static_cast<float>(rng.next_unit() < 0.5 ? -off : off);
    }
    checks.push_back({"l1_loss", a, anchored([=](const Tensor& t) {
                        return ad::l1_loss(t, target);
                      })});
  }

  // Full losses on 8x8 inputs through a depth-3 generator and a 1-layer
  // patch discriminator, parameters re-drawn at healthy scale so activations
  // and gradients are well conditioned for the finite-difference oracle.
  models::GeneratorSpec gspec;
  gspec.base_width = 4;
  gspec.depth = 3;
  gspec.dropout_stages = {0};
  models::DiscriminatorSpec dspec;
  dspec.base_width = 4;
  dspec.n_layers = 1;
  Rng g_rng(31), d_rng(32);
  models::UNetGenerator gen(gspec, g_rng);
  models::PatchDiscriminator disc(dspec, d_rng);
  Rng reinit(33);
  for (auto& group : {gen.params(), disc.params()}) {
    for (const auto& np : group) {
      for (auto& v : np.tensor->data) {
        if (np.name.find("gamma") != std::string::npos) {
          v = static_cast<float>(reinit.uniform(0.8, 1.2));
        } else if (np.name.find("beta") != std::string::npos ||
                   np.name.find("bias") != std::string::npos) {
          v = static_cast<float>(reinit.uniform(-0.1, 0.1));
        } else {
          v = static_cast<float>(reinit.uniform(-0.3, 0.3));
        }
      }
    }
  }
  {
    Tensor x = rand_tensor({1, 3, 8, 8}, rng);
    auto g_forward = [&gen](const Tensor& t) {
      Rng mask_rng(91);  // identical dropout mask on every call
      models::ForwardOptions opts;
      opts.training = true;
      opts.dropout_rng = &mask_rng;
      return gen.forward(t, opts);
    };
    // Build the L1 target as a signed offset from the base-point output so
    // the |fake - y| terms stay clear of their kinks under perturbation.
    Tensor y = g_forward(x).detached();
    for (auto& v : y.data) {
      const double off = rng.uniform(0.1, 0.5);
      v += static_cast<float>(rng.next_unit() < 0.5 ? -off : off);
    }
    // The composed losses need stronger conditioning than single layers: a
    // 0.1 anchor keeps every gradient element far from zero (so leaky-relu
    // kink crossings and final-rounding noise stay orders of magnitude below
    // tolerance) and 3e-3 keeps the probe interval under the nearest internal
    // kink. Path-level backward bugs would still surface at the 10% scale.
    auto strongly_anchored = [](std::function<Tensor(const Tensor&)> fn) {
      return [fn = std::move(fn)](const Tensor& t) {
        return ad::add(fn(t), ad::scale(ad::sum(t), 0.1f));
      };
    };
    checks.push_back({"full_generator_loss", x,
                      strongly_anchored([&disc, g_forward, y](const Tensor& t) {
                        Tensor fake = g_forward(t);
                        Tensor d_fake = disc.forward(ad::concat_channels(t, fake));
                        return models::generator_loss(d_fake, fake, y, 1.0f);
                      }),
                      3e-3f});
    Tensor real_pair = rand_tensor({1, 6, 8, 8}, rng);
    checks.push_back({"full_discriminator_loss", real_pair.detached(),
                      strongly_anchored([&disc, real_pair](const Tensor& t) {
                        Tensor d_real = disc.forward(real_pair);
                        Tensor d_fake = disc.forward(t);
                        return models::discriminator_loss(d_real, d_fake);
                      }),
                      3e-3f});
  }

  bool all_pass = true;
  double worst_max = 0, worst_median = 0;
  std::string worst_name;
  for (const auto& check : checks) {
    const auto r = ad::grad_check(check.fn, check.input, check.step);
    const bool ok = r.max_rel_err <= 1e-2 && r.median_rel_err <= 1e-3;
    if (r.max_rel_err > worst_max) {
      worst_max = r.max_rel_err;
      worst_name = check.name;
    }
    worst_median = std::max(worst_median, r.median_rel_err);
    CHECK_MESSAGE(ok, check.name << ": max " << r.max_rel_err << " median "
                                 << r.median_rel_err);
    all_pass &= ok;
  }
  const double elapsed = seconds_since(start);
  all_pass &= elapsed < 120.0;
  CHECK(elapsed < 120.0);

  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "%zu checks, worst max %.2e (%s), worst median %.2e, %.1f s",
                checks.size(), worst_max, worst_name.c_str(), worst_median, elapsed);
  report(1, "gradient correctness", all_pass, detail);
}

TEST_CASE("criterion 2: band classification equals the lattice oracle") {
  // Independent brute force over the full 32^3 lattice (step 8 per channel).
  long mismatches = 0, checked = 0;
  for (int r = 0; r < 256; r += 8) {
    for (int g = 0; g < 256; g += 8) {
      for (int b = 0; b < 256; b += 8) {
        std::optional<analytics::Band> want;
        if (std::max({r, g, b}) >= 32) {
          const int anchors[4][3] = {{255, 0, 0}, {255, 255, 0}, {0, 255, 0}, {0, 0, 255}};
          long best = -1;
          for (int i = 0; i < 4; ++i) {
            const long d2 = long(r - anchors[i][0]) * (r - anchors[i][0]) +
                            long(g - anchors[i][1]) * (g - anchors[i][1]) +
                            long(b - anchors[i][2]) * (b - anchors[i][2]);
            if (best < 0 || d2 < best) {
              best = d2;
              want = static_cast<analytics::Band>(i);
            }
          }
        }
        const auto got = analytics::classify_pixel(static_cast<std::uint8_t>(r),
                                                   static_cast<std::uint8_t>(g),
                                                   static_cast<std::uint8_t>(b));
        mismatches += got != want;
        ++checked;
      }
    }
  }
  const bool pass = mismatches == 0 && checked == 32768;
  CHECK(mismatches == 0);
  report(2, "band classification oracle equivalence", pass,
         std::to_string(checked) + " lattice points, " + std::to_string(mismatches) +
             " mismatches");
}

TEST_CASE("criterion 3: training viability at the 30/10 data scale") {
  const TrainedBundle& b = bundle();
  bool finite = !b.trained.diverged;
  for (const auto& ep : b.trained.history) finite &= ep.finite();

  const bool time_ok = b.train_seconds < 1800.0;
  const bool improved = b.l1_final <= 0.5 * b.l1_epoch0;
  const bool pass = finite && time_ok && improved &&
                    b.trained.history.size() == 200 && b.train_pairs.size() == 30 &&
                    b.test_frames.size() == 10;
  CHECK(finite);
  CHECK(time_ok);
  CHECK_MESSAGE(improved, "held-out L1 " << b.l1_epoch0 << " -> " << b.l1_final);

  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "200 epochs in %.0f s, held-out L1 %.4f -> %.4f (%.0f%% better)",
                b.train_seconds, b.l1_epoch0, b.l1_final,
                100.0 * (1.0 - b.l1_final / b.l1_epoch0));
  report(3, "training viability", pass, detail);
}

TEST_CASE("criterion 4: translation fidelity proxy on held-out frames") {
  const TrainedBundle& b = bundle();
  std::vector<double> generated, truth;
  for (const auto* frame : b.test_frames) {
    const Image fake = models::enhance(b.trained.generator, frame->visual, 64);
    generated.push_back(analytics::hot_fraction(
        analytics::count_bands(fake, analytics::CountMode::NearestAnchor)));
    truth.push_back(analytics::hot_fraction(
        analytics::count_bands(frame->thermal, analytics::CountMode::NearestAnchor)));
  }
  const double corr = pearson(generated, truth);
  const bool pass = corr >= 0.8;
  CHECK(corr >= 0.8);
  char detail[96];
  std::snprintf(detail, sizeof(detail), "Pearson %.4f over %zu held-out frames", corr,
                generated.size());
  report(4, "translation fidelity proxy", pass, detail);
}

TEST_CASE("criterion 5: lead-time reproduction and zero false alarms") {
  analytics::PredictorConfig cfg;
  std::vector<double> leads;
  int flashover_alerts = 0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    sim::ScenarioParams p;
    p.seed = seed;
    analytics::BandSeries series;
    sim::SceneState st = sim::initial_state(p);
    series.push_back({0.0, analytics::count_bands(sim::render_thermal(st),
                                                  analytics::CountMode::NearestAnchor)});
    for (int t = 1; t <= 240; ++t) {
      st = sim::evolve(st, 1.0, p);
      series.push_back({static_cast<double>(t),
                        analytics::count_bands(sim::render_thermal(st),
                                               analytics::CountMode::NearestAnchor)});
    }
    const auto alert = analytics::detect(series, cfg);
    if (alert) {
      ++flashover_alerts;
      leads.push_back(analytics::evaluate(*alert, *p.flashover_time_sec).lead_time_sec.value());
    }
  }

  int control_alerts = 0;
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    sim::ScenarioParams p;
    p.flashover_time_sec.reset();
    p.seed = seed;
    analytics::BandSeries series;
    sim::SceneState st = sim::initial_state(p);
    series.push_back({0.0, analytics::count_bands(sim::render_thermal(st),
                                                  analytics::CountMode::NearestAnchor)});
    for (int t = 1; t <= 240; ++t) {
      st = sim::evolve(st, 1.0, p);
      series.push_back({static_cast<double>(t),
                        analytics::count_bands(sim::render_thermal(st),
                                               analytics::CountMode::NearestAnchor)});
    }
    control_alerts += analytics::detect(series, cfg).has_value();
  }

  std::sort(leads.begin(), leads.end());
  const bool all_alerted = flashover_alerts == 20;
  const double best = leads.empty() ? 0.0 : leads.back();
  const double median = leads.empty() ? 0.0 : leads[leads.size() / 2];
  const bool pass = all_alerted && best >= 55.0 && median >= 40.0 && control_alerts == 0;
  CHECK(all_alerted);
  CHECK(best >= 55.0);
  CHECK(median >= 40.0);
  CHECK(control_alerts == 0);
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "20 flashover seeds: best lead %.0f s, median %.0f s; 20 control seeds: "
                "%d alerts",
                best, median, control_alerts);
  report(5, "lead-time reproduction", pass, detail);
}

TEST_CASE("criterion 6: per-frame latency") {
  const TrainedBundle& b = bundle();
  const Image& frame = b.test_frames[0]->visual;

  // Warm up once, then time several enhance passes.
  (void)models::enhance(b.trained.generator, frame, 64);
  double enhance_ms = 0;
  const int runs = 5;
  for (int i = 0; i < runs; ++i) {
    const auto start = std::chrono::steady_clock::now();
    (void)models::enhance(b.trained.generator, frame, 64);
    enhance_ms += seconds_since(start) * 1000.0;
  }
  enhance_ms /= runs;

  // Analytics update: count one frame and re-run detection over a full
  // 240-sample series.
  analytics::BandSeries series;
  {
    sim::ScenarioParams p;
    p.seed = 5;
    sim::SceneState st = sim::initial_state(p);
    series.push_back({0.0, sim::truth_counts(st)});
    for (int t = 1; t <= 240; ++t) {
      st = sim::evolve(st, 1.0, p);
      series.push_back({static_cast<double>(t), sim::truth_counts(st)});
    }
  }
  const Image thermal = b.test_frames[0]->thermal;
  analytics::PredictorConfig cfg;
  double analytics_ms = 0;
  std::int64_t sink = 0;
  for (int i = 0; i < runs; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const auto counts = analytics::count_bands(thermal, analytics::CountMode::NearestAnchor);
    sink += counts.red;
    const auto alert = analytics::detect(series, cfg);
    sink += alert.has_value();
    analytics_ms += seconds_since(start) * 1000.0;
  }
  analytics_ms /= runs;
  CHECK(sink >= 0);

  const bool pass = enhance_ms < 100.0 && analytics_ms < 5.0;
  CHECK(enhance_ms < 100.0);
  CHECK(analytics_ms < 5.0);
  char detail[96];
  std::snprintf(detail, sizeof(detail), "enhance %.1f ms, count+detect %.3f ms", enhance_ms,
                analytics_ms);
  report(6, "latency", pass, detail);
}

TEST_CASE("criterion 7: determinism and persistence") {
  // Byte-identical artifacts from two identical e2e runs (reduced epochs keep
  // the double-train affordable; determinism does not depend on epoch count).
  const auto dir_a = work_dir("e2e_a");
  const auto dir_b = work_dir("e2e_b");
  E2eParams params;
  params.seed = 11;
  params.epochs = 6;
  params.out_dir = dir_a;
  const auto res_a = run_e2e(params);
  params.out_dir = dir_b;
  const auto res_b = run_e2e(params);

  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  const std::string csv_a = slurp(dir_a / "report.csv");
  const std::string csv_b = slurp(dir_b / "report.csv");
  const std::string sum_a = slurp(dir_a / "summary.json");
  const std::string sum_b = slurp(dir_b / "summary.json");

  const bool csv_same = !csv_a.empty() && csv_a == csv_b;
  const bool sum_same = !sum_a.empty() && sum_a == sum_b;
  CHECK(csv_same);
  CHECK(sum_same);
  CHECK(res_a.exit_code == res_b.exit_code);

  // Checkpoint persistence is parameter-wise bit-exact.
  TrainedBundle& b = bundle();
  models::TrainConfig cfg = b.cfg;
  auto ckpt = models::make_checkpoint(b.trained, cfg);
  const auto ckpt_path = work_dir("ckpt") / "model.fgan";
  models::save_checkpoint(ckpt, ckpt_path);
  const auto loaded = models::load_checkpoint(ckpt_path);
  bool bits_equal = loaded.tensors.size() == ckpt.tensors.size();
  for (std::size_t i = 0; bits_equal && i < ckpt.tensors.size(); ++i) {
    bits_equal = loaded.tensors[i].first == ckpt.tensors[i].first &&
                 loaded.tensors[i].second.data == ckpt.tensors[i].second.data;
  }
  CHECK(bits_equal);

  const bool pass = csv_same && sum_same && bits_equal && res_a.exit_code == res_b.exit_code;
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "csv %s, summary %s, checkpoint %s (%zu tensors), e2e exit %d",
                csv_same ? "identical" : "DIFFERS", sum_same ? "identical" : "DIFFERS",
                bits_equal ? "bit-exact" : "DIFFERS", ckpt.tensors.size(), res_a.exit_code);
  report(7, "determinism and persistence", pass, detail);
}

TEST_CASE("control scenario e2e exits with the no-alert code") {
  E2eParams params;
  params.seed = 7;
  params.epochs = 4;
  params.flashover_at.reset();
  params.out_dir = work_dir("e2e_control");
  const auto result = run_e2e(params);
  CHECK(result.exit_code == kE2eNoAlert);  // no alert is the pass condition here
  CHECK_FALSE(result.alert_time_sec.has_value());
  CHECK(std::filesystem::exists(params.out_dir / "summary.json"));
}

TEST_CASE("train L1 decreases over the early epochs across seeds") {
  // Strict decrease of the epoch-mean training L1 over the first 20 epochs,
  // expected in at least 90% of seeded runs.
  sim::ScenarioParams scenario;
  scenario.seed = 3;
  const sim::Dataset ds = sim::generate_dataset(scenario, 10);
  std::vector<models::ImagePair> pairs;
  for (const auto& f : ds.frames) pairs.push_back({f.visual, f.thermal});

  int monotone = 0;
  const int runs = 10;
  for (int seed = 0; seed < runs; ++seed) {
    models::TrainConfig cfg;
    cfg.epochs = 20;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const auto out = models::train(pairs, cfg);
    bool strict = out.history.size() == 20;
    for (std::size_t e = 1; e < out.history.size(); ++e) {
      strict &= out.history[e].g_l1 < out.history[e - 1].g_l1;
    }
    monotone += strict;
  }
  CHECK(monotone >= 9);
  std::printf("train-l1 invariant: %d/%d seeded runs strictly decreasing\n", monotone, runs);
}

TEST_CASE("criterion 8: probe transparency") {
  const TrainedBundle& b = bundle();
  Rng rng(404);
  bool identical = true;
  for (int trial = 0; trial < 10; ++trial) {
    Image frame(64, 64);
    for (auto& p : frame.pixels) p = static_cast<std::uint8_t>(rng.next_int(0, 255));
    const Tensor untapped = b.trained.generator.forward(models::image_to_tensor(frame));
    const std::vector<std::string> names{"enc1", "enc6", "dec3", "out"};
    const auto set = probe::capture(b.trained.generator, frame, names);
    const Tensor* out = set.find("out");
    identical &= out != nullptr && out->data == untapped.data;
  }
  CHECK(identical);
  report(8, "probe transparency", identical, "10 random inputs, tapped == untapped bitwise");
}
