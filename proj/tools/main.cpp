// Command-line surface for the flashover early-warning pipeline.
//
// Subcommands: simulate, train, enhance, analyze, predict, probe, e2e.
// Every run prints its resolved configuration (defaults included) as one JSON
// line before doing any work, so runs are reproducible from logs alone.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fgan/analytics.hpp"
#include "fgan/checkpoint.hpp"
#include "fgan/e2e.hpp"
#include "fgan/ppm.hpp"
#include "fgan/probe.hpp"
#include "fgan/sim.hpp"
#include "fgan/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void print_config(json j) {
  std::cout << j.dump() << std::endl;
}

std::optional<double> parse_flashover(const std::string& text) {
  if (text == "none") return std::nullopt;
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    throw fgan::ConfigError("--flashover-at expects a number of seconds or 'none', got '" +
                            text + "'");
  }
}

json flashover_json(const std::optional<double>& v) {
  return v ? json(*v) : json("none");
}

// Timestamped thermal-looking frames in a directory, sorted by time. Visual
// frames are skipped so a dataset directory analyzes its thermal halves.
std::vector<std::pair<double, fs::path>> collect_frames(const fs::path& dir) {
  std::vector<std::pair<double, fs::path>> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".ppm") continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("visual_", 0) == 0) continue;
    const auto t = fgan::sim::parse_frame_time(name);
    if (t) frames.emplace_back(*t, entry.path());
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

int cmd_simulate(const fs::path& out, std::uint64_t seed, int frames, int fps,
                 const std::string& flashover_at, int size) {
  const auto flashover = parse_flashover(flashover_at);
  print_config({{"command", "simulate"},
                {"out", out.string()},
                {"seed", seed},
                {"frames", frames},
                {"fps", fps},
                {"flashover_at", flashover_json(flashover)},
                {"size", size}});
  fgan::sim::ScenarioParams params;
  params.seed = seed;
  params.fps = fps;
  params.flashover_time_sec = flashover;
  params.image_size = size;
  const auto dataset = fgan::sim::generate_dataset(params, frames);
  fgan::sim::write_dataset(dataset, out);
  std::cout << "wrote " << dataset.frames.size() << " paired frames to " << out.string()
            << std::endl;
  return 0;
}

int cmd_train(const fs::path& data, const fs::path& out, int epochs, float lr,
              float lambda_l1, std::uint64_t seed) {
  print_config({{"command", "train"},
                {"data", data.string()},
                {"out", out.string()},
                {"epochs", epochs},
                {"lr", lr},
                {"lambda_l1", lambda_l1},
                {"seed", seed}});
  const auto manifest = fgan::sim::read_manifest(data);
  std::vector<fgan::models::ImagePair> pairs;
  for (const auto& entry : manifest) {
    if (entry.is_test) continue;
    pairs.push_back(
        {fgan::read_ppm(data / entry.visual), fgan::read_ppm(data / entry.thermal)});
  }
  if (pairs.empty()) throw fgan::DataError("no training frames in manifest");

  fgan::models::TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.lr = lr;
  cfg.lambda_l1 = lambda_l1;
  cfg.seed = seed;
  cfg.image_size = pairs.front().visual.width;
  auto trained = fgan::models::train(pairs, cfg);
  fgan::models::save_checkpoint(fgan::models::make_checkpoint(trained, cfg), out);

  if (!trained.history.empty()) {
    const auto& first = trained.history.front();
    const auto& last = trained.history.back();
    std::cout << "epoch 1: g=" << first.g_total << " d=" << first.d << "; epoch "
              << trained.history.size() << ": g=" << last.g_total << " d=" << last.d
              << std::endl;
  }
  std::cout << "checkpoint written to " << out.string() << std::endl;
  if (trained.diverged) {
    std::cerr << "training diverged (non-finite loss)" << std::endl;
    return 1;
  }
  return 0;
}

int cmd_enhance(const fs::path& ckpt_path, const fs::path& in, const fs::path& out) {
  print_config({{"command", "enhance"},
                {"ckpt", ckpt_path.string()},
                {"in", in.string()},
                {"out", out.string()}});
  const auto ckpt = fgan::models::load_checkpoint(ckpt_path);
  const auto gen = ckpt.restore_generator();

  std::vector<fs::path> inputs;
  if (fs::is_directory(in)) {
    for (const auto& entry : fs::directory_iterator(in)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && name.rfind("visual_", 0) == 0 &&
          entry.path().extension() == ".ppm") {
        inputs.push_back(entry.path());
      }
    }
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) throw fgan::DataError("no visual_*.ppm frames in " + in.string());
  } else {
    inputs.push_back(in);
  }

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw fgan::IoError("cannot create " + out.string() + ": " + ec.message());
  for (const auto& path : inputs) {
    const fgan::Image frame = fgan::read_ppm(path);
    const fgan::Image thermal = fgan::models::enhance(gen, frame, ckpt.meta.image_size);
    const auto t = fgan::sim::parse_frame_time(path.filename().string());
    const std::string name = t ? fgan::sim::frame_stem("enhanced", *t) + ".ppm"
                               : "enhanced_" + path.filename().string();
    fgan::write_ppm(thermal, out / name);
  }
  std::cout << "enhanced " << inputs.size() << " frame(s) into " << out.string() << std::endl;
  return 0;
}

int cmd_analyze(const fs::path& in, const std::string& mode_name, const fs::path& report) {
  print_config({{"command", "analyze"},
                {"in", in.string()},
                {"mode", mode_name},
                {"report", report.string()}});
  const auto mode = fgan::analytics::parse_count_mode(mode_name);
  const auto frames = collect_frames(in);
  if (frames.empty()) {
    throw fgan::DataError("no timestamped thermal frames (*_t<ms>.ppm) in " + in.string());
  }
  fgan::analytics::BandSeries series;
  for (const auto& [t, path] : frames) {
    series.push_back({t, fgan::analytics::count_bands(fgan::read_ppm(path), mode)});
  }
  fgan::analytics::write_report_csv(series, report);
  std::cout << "analyzed " << series.size() << " frames into " << report.string()
            << std::endl;
  return 0;
}

int cmd_predict(const fs::path& report, double theta, int window, int consecutive,
                double warmup, std::optional<double> truth, const fs::path& alert_path) {
  json cfg_line{{"command", "predict"}, {"report", report.string()},
                {"theta", theta},      {"window", window},
                {"consecutive", consecutive}, {"warmup", warmup},
                {"alert", alert_path.string()}};
  cfg_line["truth"] = truth ? json(*truth) : json(nullptr);
  print_config(cfg_line);

  const auto rows = fgan::analytics::read_report_csv(report);
  std::vector<double> t, hot;
  for (const auto& row : rows) {
    t.push_back(row.t_sec);
    hot.push_back(row.hot_fraction);
  }
  fgan::analytics::PredictorConfig cfg;
  cfg.theta = theta;
  cfg.window = window;
  cfg.consecutive = consecutive;
  cfg.warmup_sec = warmup;
  auto alert = fgan::analytics::detect_values(t, hot, cfg);
  if (alert && truth) *alert = fgan::analytics::evaluate(*alert, *truth);

  std::ofstream out(alert_path, std::ios::binary | std::ios::trunc);
  if (!out) throw fgan::IoError("cannot open " + alert_path.string() + " for writing");
  out << fgan::analytics::alert_json(alert, cfg);

  if (alert) {
    std::cout << "alert at t=" << alert->alert_time_sec
              << " s (rate " << alert->observed_rate << "/s)";
    if (alert->lead_time_sec) std::cout << ", lead " << *alert->lead_time_sec << " s";
    std::cout << std::endl;
  } else {
    std::cout << "no alert" << std::endl;
  }
  return 0;
}

int cmd_probe(const fs::path& ckpt_path, const fs::path& in, const std::string& layers,
              const fs::path& out) {
  print_config({{"command", "probe"},
                {"ckpt", ckpt_path.string()},
                {"in", in.string()},
                {"layers", layers},
                {"out", out.string()}});
  const auto ckpt = fgan::models::load_checkpoint(ckpt_path);
  const auto gen = ckpt.restore_generator();

  std::vector<std::string> names;
  std::string current;
  for (char c : layers) {
    if (c == ',') {
      if (!current.empty()) names.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) names.push_back(current);
  if (names.empty()) throw fgan::ConfigError("--layers needs at least one layer name");

  const auto set = fgan::probe::capture(gen, fgan::read_ppm(in), names);
  const auto written = fgan::probe::export_maps(set, out);
  for (const auto& path : written) std::cout << "wrote " << path.string() << std::endl;
  return 0;
}

int cmd_e2e(const fs::path& out, std::uint64_t seed, int epochs, int frames,
            const std::string& flashover_at, int size) {
  const auto flashover = parse_flashover(flashover_at);
  print_config({{"command", "e2e"},
                {"out", out.string()},
                {"seed", seed},
                {"epochs", epochs},
                {"frames", frames},
                {"flashover_at", flashover_json(flashover)},
                {"size", size}});
  fgan::E2eParams params;
  params.out_dir = out;
  params.seed = seed;
  params.epochs = epochs;
  params.frames = frames;
  params.image_size = size;
  params.flashover_at = flashover;
  const auto result = fgan::run_e2e(params);
  if (result.lead_time_sec) {
    std::cout << "lead_time_sec=" << *result.lead_time_sec << std::endl;
  } else if (result.alert_time_sec) {
    std::cout << "alert at t=" << *result.alert_time_sec << " s (no ground truth)" << std::endl;
  } else {
    std::cout << "no alert raised" << std::endl;
  }
  std::cout << "summary: " << result.summary_path.string() << std::endl;
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flashover early-warning pipeline: visual-to-thermal translation, "
               "band analytics and rate-based alerting over a procedural burn-pod "
               "simulator"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a paired visual/thermal dataset");
  std::string sim_out;
  std::uint64_t sim_seed = 0;
  int sim_frames = 40, sim_fps = 1, sim_size = 64;
  std::string sim_flash = "200";
  simulate->add_option("--out", sim_out, "Output dataset directory")->required();
  simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("--frames", sim_frames, "Paired frames to emit");
  simulate->add_option("--fps", sim_fps, "Simulator sampling rate");
  simulate->add_option("--flashover-at", sim_flash, "Flashover time in seconds, or 'none'");
  simulate->add_option("--size", sim_size, "Frame extent in pixels");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the translation model on a dataset");
  std::string train_data, train_out;
  int train_epochs = 200;
  float train_lr = 2e-4f, train_lambda = 100.0f;
  std::uint64_t train_seed = 0;
  train_cmd->add_option("--data", train_data, "Dataset directory (with manifest.jsonl)")->required();
  train_cmd->add_option("--out", train_out, "Checkpoint file to write")->required();
  train_cmd->add_option("--epochs", train_epochs, "Training epochs");
  train_cmd->add_option("--lr", train_lr, "Adam learning rate");
  train_cmd->add_option("--lambda-l1", train_lambda, "L1 loss weight");
  train_cmd->add_option("--seed", train_seed, "Random seed");

  // enhance
  auto* enhance_cmd = app.add_subcommand("enhance", "Translate visual frames to thermal");
  std::string enh_ckpt, enh_in, enh_out;
  enhance_cmd->add_option("--ckpt", enh_ckpt, "Checkpoint file")->required();
  enhance_cmd->add_option("--in", enh_in, "Visual frame file or dataset directory")->required();
  enhance_cmd->add_option("--out", enh_out, "Output directory")->required();

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Count thermal bands into a CSV report");
  std::string ana_in, ana_mode = "nearest_anchor", ana_report;
  analyze_cmd->add_option("--in", ana_in, "Directory of thermal frames")->required();
  analyze_cmd->add_option("--mode", ana_mode, "nearest_anchor or channel_sum");
  analyze_cmd->add_option("--report", ana_report, "CSV report path")->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Run the flashover detector on a report");
  std::string pre_report, pre_alert;
  double pre_theta = 0.004, pre_warmup = 20.0;
  int pre_window = 5, pre_consecutive = 3;
  double pre_truth = -1.0;
  bool pre_truth_set = false;
  predict_cmd->add_option("--report", pre_report, "CSV report path")->required();
  predict_cmd->add_option("--theta", pre_theta, "Rate threshold (hot fraction per second)");
  predict_cmd->add_option("--window", pre_window, "Smoothing window in samples");
  predict_cmd->add_option("--consecutive", pre_consecutive, "Consecutive samples required");
  predict_cmd->add_option("--warmup", pre_warmup, "Warmup seconds before alerts may fire");
  auto* truth_opt = predict_cmd->add_option("--truth", pre_truth, "Ground-truth flashover time");
  predict_cmd->add_option("--alert", pre_alert, "Alert JSON path")->required();

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "Export latent activation maps");
  std::string prb_ckpt, prb_in, prb_layers, prb_out;
  probe_cmd->add_option("--ckpt", prb_ckpt, "Checkpoint file")->required();
  probe_cmd->add_option("--in", prb_in, "Visual frame (PPM)")->required();
  probe_cmd->add_option("--layers", prb_layers, "Comma-separated layer names")->required();
  probe_cmd->add_option("--out", prb_out, "Output directory")->required();

  // e2e
  auto* e2e_cmd = app.add_subcommand("e2e", "Full pipeline: simulate, train, enhance, "
                                            "analyze, predict");
  std::string e2e_out;
  std::uint64_t e2e_seed = 0;
  int e2e_epochs = 200, e2e_frames = 40, e2e_size = 64;
  std::string e2e_flash = "200";
  e2e_cmd->add_option("--out", e2e_out, "Output directory")->required();
  e2e_cmd->add_option("--seed", e2e_seed, "Random seed");
  e2e_cmd->add_option("--epochs", e2e_epochs, "Training epochs");
  e2e_cmd->add_option("--frames", e2e_frames, "Paired frames to simulate");
  e2e_cmd->add_option("--flashover-at", e2e_flash, "Flashover time in seconds, or 'none'");
  e2e_cmd->add_option("--size", e2e_size, "Frame extent in pixels");

  CLI11_PARSE(app, argc, argv);
  pre_truth_set = truth_opt->count() > 0;

  try {
    if (*simulate) {
      return cmd_simulate(sim_out, sim_seed, sim_frames, sim_fps, sim_flash, sim_size);
    }
    if (*train_cmd) {
      return cmd_train(train_data, train_out, train_epochs, train_lr, train_lambda, train_seed);
    }
    if (*enhance_cmd) return cmd_enhance(enh_ckpt, enh_in, enh_out);
    if (*analyze_cmd) return cmd_analyze(ana_in, ana_mode, ana_report);
    if (*predict_cmd) {
      return cmd_predict(pre_report, pre_theta, pre_window, pre_consecutive, pre_warmup,
                         pre_truth_set ? std::optional<double>(pre_truth) : std::nullopt,
                         pre_alert);
    }
    if (*probe_cmd) return cmd_probe(prb_ckpt, prb_in, prb_layers, prb_out);
    if (*e2e_cmd) return cmd_e2e(e2e_out, e2e_seed, e2e_epochs, e2e_frames, e2e_flash, e2e_size);
  } catch (const fgan::IoError& e) {
    std::cerr << "io error: " << e.what() << std::endl;
    return 4;
  } catch (const fgan::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
