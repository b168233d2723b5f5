#include "fgan/analytics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fgan::analytics {

Band band_of_temperature(double fahrenheit) {
  if (fahrenheit < 100.0) return Band::Blue;
  if (fahrenheit < 200.0) return Band::Green;
  if (fahrenheit < 300.0) return Band::Yellow;
  return Band::Red;  // [300, 500] plus clamp above
}

const char* band_name(Band b) {
  switch (b) {
    case Band::Red: return "red";
    case Band::Yellow: return "yellow";
    case Band::Green: return "green";
    case Band::Blue: return "blue";
  }
  return "?";
}

CountMode parse_count_mode(const std::string& name) {
  if (name == "nearest_anchor") return CountMode::NearestAnchor;
  if (name == "channel_sum") return CountMode::ChannelSum;
  throw ConfigError("unknown count mode '" + name +
                    "' (expected nearest_anchor or channel_sum)");
}

const char* count_mode_name(CountMode mode) {
  return mode == CountMode::NearestAnchor ? "nearest_anchor" : "channel_sum";
}

std::optional<Band> classify_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int maxc = std::max({int(r), int(g), int(b)});
  if (maxc < kBackgroundFloor) return std::nullopt;
  long best = -1;
  Band best_band = Band::Red;
  for (std::size_t i = 0; i < kBandAnchors.size(); ++i) {  // hottest first
    const auto& a = kBandAnchors[i];
    const long dr = long(r) - a[0], dg = long(g) - a[1], db = long(b) - a[2];
    const long d2 = dr * dr + dg * dg + db * db;
    if (best < 0 || d2 < best) {  // strict: ties stay with the hotter band
      best = d2;
      best_band = static_cast<Band>(i);
    }
  }
  return best_band;
}

BandCounts count_bands(const Image& image, CountMode mode) {
  if (image.width < 1 || image.height < 1 || image.pixels.empty()) {
    throw DataError("count_bands on an empty image");
  }
  BandCounts c;
  c.total = static_cast<std::int64_t>(image.width) * image.height;

  if (mode == CountMode::NearestAnchor) {
    for (std::size_t i = 0; i < image.pixels.size(); i += 3) {
      const auto band = classify_pixel(image.pixels[i], image.pixels[i + 1], image.pixels[i + 2]);
      if (!band) {
        ++c.background;
        continue;
      }
      switch (*band) {
        case Band::Red: ++c.red; break;
        case Band::Yellow: ++c.yellow; break;
        case Band::Green: ++c.green; break;
        case Band::Blue: ++c.blue; break;
      }
    }
    c.red_f = static_cast<double>(c.red);
    c.yellow_f = static_cast<double>(c.yellow);
    c.green_f = static_cast<double>(c.green);
    c.blue_f = static_cast<double>(c.blue);
    return c;
  }

  // channel_sum: continuous intensity sums; yellow is the mean of the red and
  // green sums. No per-pixel labels and no background notion.
  double rs = 0.0, gs = 0.0, bs = 0.0;
  for (std::size_t i = 0; i < image.pixels.size(); i += 3) {
    rs += image.pixels[i] / 255.0;
    gs += image.pixels[i + 1] / 255.0;
    bs += image.pixels[i + 2] / 255.0;
  }
  c.red_f = rs;
  c.green_f = gs;
  c.blue_f = bs;
  c.yellow_f = (rs + gs) / 2.0;
  c.red = std::llround(rs);
  c.green = std::llround(gs);
  c.blue = std::llround(bs);
  c.yellow = std::llround(c.yellow_f);
  c.background = 0;
  return c;
}

double hot_fraction(const BandCounts& counts) {
  const std::int64_t denom = counts.total - counts.background;
  if (denom <= 0) {
    throw DataError("hot fraction undefined: frame is entirely background");
  }
  return (counts.red_f + counts.yellow_f) / static_cast<double>(denom);
}

std::vector<double> smooth(std::span<const double> series, int window) {
  if (window < 1) throw ConfigError("smoothing window must be >= 1");
  std::vector<double> out(series.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= static_cast<std::size_t>(window)) acc -= series[i - window];
    const std::size_t n = std::min<std::size_t>(i + 1, window);
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

std::vector<double> rate(std::span<const double> t, std::span<const double> value) {
  if (t.size() != value.size()) throw DataError("rate: time/value length mismatch");
  if (t.size() < 2) throw DataError("rate needs at least two samples");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double dt = t[i] - t[i - 1];
    if (dt <= 0.0) {
      throw DataError("rate: timestamps must be strictly increasing (t[" +
                      std::to_string(i) + "] = " + std::to_string(t[i]) + ")");
    }
    out[i] = (value[i] - value[i - 1]) / dt;
  }
  return out;
}

void PredictorConfig::validate() const {
  if (window < 1) throw ConfigError("predictor window must be >= 1");
  if (consecutive < 1) throw ConfigError("predictor consecutive must be >= 1");
  if (!(theta > 0.0)) throw ConfigError("predictor theta must be > 0");
  if (warmup_sec < 0.0) throw ConfigError("predictor warmup must be >= 0");
}

std::optional<FlashoverAlert> detect_values(std::span<const double> t,
                                            std::span<const double> hot,
                                            const PredictorConfig& config) {
  config.validate();
  if (t.size() != hot.size()) throw DataError("detect: time/value length mismatch");
  if (t.size() < static_cast<std::size_t>(config.window + config.consecutive)) {
    throw DataError("detect needs at least window + consecutive = " +
                    std::to_string(config.window + config.consecutive) + " samples, got " +
                    std::to_string(t.size()));
  }
  const std::vector<double> smoothed = smooth(hot, config.window);
  const std::vector<double> rates = rate(t, smoothed);

  int run = 0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (t[i] >= config.warmup_sec && rates[i] >= config.theta) {
      if (++run >= config.consecutive) {
        FlashoverAlert alert;
        alert.alert_time_sec = t[i];
        alert.observed_rate = rates[i];
        alert.hot_fraction_at_alert = smoothed[i];
        return alert;
      }
    } else {
      run = 0;
    }
  }
  return std::nullopt;
}

std::optional<FlashoverAlert> detect(const BandSeries& series, const PredictorConfig& config) {
  std::vector<double> t(series.size()), hot(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].counts.total != series[0].counts.total) {
      throw DataError("band series mixes frame sizes: total " +
                      std::to_string(series[i].counts.total) + " at t=" +
                      std::to_string(series[i].t_sec) + " vs " +
                      std::to_string(series[0].counts.total));
    }
    t[i] = series[i].t_sec;
    hot[i] = hot_fraction(series[i].counts);
  }
  return detect_values(t, hot, config);
}

FlashoverAlert evaluate(FlashoverAlert alert, double ground_truth_flashover_sec) {
  alert.lead_time_sec = ground_truth_flashover_sec - alert.alert_time_sec;
  return alert;
}

namespace {

std::string fmt_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string render_report_csv(const BandSeries& series, const PredictorConfig& config) {
  std::vector<double> t(series.size()), hot(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    t[i] = series[i].t_sec;
    hot[i] = hot_fraction(series[i].counts);
  }
  std::vector<double> rates(series.size(), 0.0);
  if (series.size() >= 2) rates = rate(t, smooth(hot, config.window));

  std::ostringstream os;
  os << "t_sec,red,yellow,green,blue,background,total,hot_fraction,hot_rate\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& c = series[i].counts;
    os << fmt_g6(t[i]) << ',' << c.red << ',' << c.yellow << ',' << c.green << ','
       << c.blue << ',' << c.background << ',' << c.total << ',' << fmt_g6(hot[i]) << ','
       << fmt_g6(rates[i]) << '\n';
  }
  return os.str();
}

void write_report_csv(const BandSeries& series, const std::filesystem::path& path,
                      const PredictorConfig& config) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << render_report_csv(series, config);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("report csv is empty: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string expect = "t_sec,red,yellow,green,blue,background,total,hot_fraction,hot_rate";
  if (line != expect) {
    throw ParseError("report csv header mismatch in " + path.string() + ": got '" + line + "'");
  }

  std::vector<ReportRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 9) {
      throw ParseError("report csv line " + std::to_string(lineno) + " has " +
                       std::to_string(fields.size()) + " fields, expected 9");
    }
    try {
      ReportRow row;
      row.t_sec = std::stod(fields[0]);
      row.counts.red = std::stoll(fields[1]);
      row.counts.yellow = std::stoll(fields[2]);
      row.counts.green = std::stoll(fields[3]);
      row.counts.blue = std::stoll(fields[4]);
      row.counts.background = std::stoll(fields[5]);
      row.counts.total = std::stoll(fields[6]);
      row.counts.red_f = static_cast<double>(row.counts.red);
      row.counts.yellow_f = static_cast<double>(row.counts.yellow);
      row.counts.green_f = static_cast<double>(row.counts.green);
      row.counts.blue_f = static_cast<double>(row.counts.blue);
      row.hot_fraction = std::stod(fields[7]);
      row.hot_rate = std::stod(fields[8]);
      rows.push_back(row);
    } catch (const std::exception&) {
      throw ParseError("report csv line " + std::to_string(lineno) + " is not numeric");
    }
  }
  return rows;
}

std::string alert_json(const std::optional<FlashoverAlert>& alert,
                       const PredictorConfig& config) {
  nlohmann::json j;
  if (alert) {
    j["alert_time_sec"] = alert->alert_time_sec;
    j["observed_rate"] = alert->observed_rate;
    j["hot_fraction_at_alert"] = alert->hot_fraction_at_alert;
    if (alert->lead_time_sec) {
      j["lead_time_sec"] = *alert->lead_time_sec;
    } else {
      j["lead_time_sec"] = nullptr;
    }
  } else {
    j["alert_time_sec"] = nullptr;
    j["observed_rate"] = nullptr;
    j["hot_fraction_at_alert"] = nullptr;
    j["lead_time_sec"] = nullptr;
  }
  j["config"] = {{"window", config.window},
                 {"theta", config.theta},
                 {"consecutive", config.consecutive},
                 {"warmup_sec", config.warmup_sec}};
  return j.dump(2) + "\n";
}

}  // namespace fgan::analytics
