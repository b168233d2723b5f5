#include "fgan/e2e.hpp"

#include <fstream>

#include <json.hpp>

#include "fgan/checkpoint.hpp"
#include "fgan/ppm.hpp"
#include "fgan/sim.hpp"
#include "fgan/train.hpp"

namespace fgan {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

E2eResult run_e2e(const E2eParams& params) {
  E2eResult result;
  try {
    std::error_code ec;
    std::filesystem::create_directories(params.out_dir, ec);
    if (ec) throw IoError("cannot create " + params.out_dir.string() + ": " + ec.message());

    // Simulate.
    sim::ScenarioParams scenario;
    scenario.duration_sec = params.duration_sec;
    scenario.fps = params.fps;
    scenario.flashover_time_sec = params.flashover_at;
    scenario.image_size = params.image_size;
    scenario.seed = params.seed;
    const sim::Dataset dataset = sim::generate_dataset(scenario, params.frames);
    sim::write_dataset(dataset, params.out_dir / "dataset");

    std::vector<models::ImagePair> train_pairs;
    std::vector<const sim::PairedFrame*> test_frames;
    for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
      if (dataset.is_test[i]) {
        test_frames.push_back(&dataset.frames[i]);
      } else {
        train_pairs.push_back({dataset.frames[i].visual, dataset.frames[i].thermal});
      }
    }

    // Train.
    models::TrainConfig cfg;
    cfg.epochs = params.epochs;
    cfg.lr = params.lr;
    cfg.lambda_l1 = params.lambda_l1;
    cfg.seed = params.seed;
    cfg.image_size = params.image_size;
    models::TrainOutput trained = models::train(train_pairs, cfg);
    const models::Checkpoint ckpt = models::make_checkpoint(trained, cfg);
    models::save_checkpoint(ckpt, params.out_dir / "model.fgan");

    // Enhance the held-out visual frames.
    const auto enhanced_dir = params.out_dir / "enhanced";
    std::filesystem::create_directories(enhanced_dir, ec);
    if (ec) throw IoError("cannot create " + enhanced_dir.string() + ": " + ec.message());
    analytics::BandSeries series;
    for (const sim::PairedFrame* frame : test_frames) {
      const Image thermal =
          models::enhance(trained.generator, frame->visual, params.image_size);
      write_ppm(thermal, enhanced_dir / (sim::frame_stem("enhanced", frame->t_sec) + ".ppm"));
      series.push_back(
          {frame->t_sec, analytics::count_bands(thermal, analytics::CountMode::NearestAnchor)});
    }

    // Analyze + predict.
    analytics::write_report_csv(series, params.out_dir / "report.csv", params.predictor);
    std::optional<analytics::FlashoverAlert> alert;
    try {
      alert = analytics::detect(series, params.predictor);
    } catch (const DataError&) {
      alert.reset();  // too few held-out frames to run the detector
    }
    if (alert && params.flashover_at) {
      *alert = analytics::evaluate(*alert, *params.flashover_at);
    }
    write_text(params.out_dir / "alert.json", analytics::alert_json(alert, params.predictor));

    if (trained.diverged) {
      result.exit_code = kE2eTrainingDiverged;
    } else if (!alert) {
      result.exit_code = kE2eNoAlert;
    }
    if (alert) {
      result.alert_time_sec = alert->alert_time_sec;
      result.lead_time_sec = alert->lead_time_sec;
    }

    // Summary.
    nlohmann::json summary;
    summary["seed"] = params.seed;
    summary["epochs"] = static_cast<int>(trained.history.size());
    summary["frames"] = params.frames;
    summary["image_size"] = params.image_size;
    summary["train_pairs"] = train_pairs.size();
    summary["test_frames"] = test_frames.size();
    if (params.flashover_at) {
      summary["flashover_time_sec"] = *params.flashover_at;
    } else {
      summary["flashover_time_sec"] = nullptr;
    }
    summary["alert_time_sec"] =
        alert ? nlohmann::json(alert->alert_time_sec) : nlohmann::json(nullptr);
    summary["lead_time_sec"] = (alert && alert->lead_time_sec)
                                   ? nlohmann::json(*alert->lead_time_sec)
                                   : nlohmann::json(nullptr);
    summary["training_diverged"] = trained.diverged;
    if (!trained.history.empty()) {
      summary["final_g_loss"] = trained.history.back().g_total;
      summary["final_d_loss"] = trained.history.back().d;
    }
    summary["checkpoint"] = "model.fgan";
    summary["report_csv"] = "report.csv";
    summary["alert_json"] = "alert.json";
    summary["exit_code"] = result.exit_code;
    result.summary_path = params.out_dir / "summary.json";
    write_text(result.summary_path, summary.dump(2) + "\n");
  } catch (const IoError&) {
    result.exit_code = kE2eIoFailure;
    throw;
  }
  return result;
}

}  // namespace fgan
