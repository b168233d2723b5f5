#include "fgan/probe.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fgan/ppm.hpp"

namespace fgan::probe {

const ad::Tensor* ActivationSet::find(const std::string& name) const {
  for (const auto& [n, t] : items) {
    if (n == name) return &t;
  }
  return nullptr;
}

ActivationSet capture(const models::UNetGenerator& gen, const Image& input,
                      std::span<const std::string> layer_names) {
  const auto valid = gen.layer_names();
  std::set<std::string> requested;
  for (const auto& name : layer_names) {
    if (std::find(valid.begin(), valid.end(), name) == valid.end()) {
      std::string known;
      for (const auto& v : valid) {
        if (!known.empty()) known += ", ";
        known += v;
      }
      throw ConfigError("unknown layer '" + name + "'; valid layers: " + known);
    }
    if (!requested.insert(name).second) {
      throw ConfigError("layer '" + name + "' requested twice");
    }
  }

  ActivationSet set;
  models::TapFn tap = [&](const std::string& name, const ad::Tensor& t) {
    if (requested.count(name)) set.items.emplace_back(name, t.detached());
  };
  models::ForwardOptions opts;
  opts.tap = &tap;
  gen.forward(models::image_to_tensor(input), opts);
  return set;
}

std::vector<std::filesystem::path> export_maps(const ActivationSet& set,
                                               const std::filesystem::path& out_dir,
                                               int max_channels) {
  if (max_channels < 1) throw ConfigError("max_channels must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  for (const auto& [name, t] : set.items) {
    if (t.rank() != 4) throw ContractError("activation '" + name + "' is not NCHW");
    const int C = std::min(t.shape[1], max_channels);
    const int H = t.shape[2], W = t.shape[3];
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(C))));
    const int rows = (C + cols - 1) / cols;

    Image tile(cols * W, rows * H);
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    for (int c = 0; c < C; ++c) {
      const float* src = t.data.data() + static_cast<std::size_t>(c) * plane;
      float lo = src[0], hi = src[0];
      for (std::size_t i = 1; i < plane; ++i) {
        lo = std::min(lo, src[i]);
        hi = std::max(hi, src[i]);
      }
      const int ox = (c % cols) * W;
      const int oy = (c / cols) * H;
      for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
          std::uint8_t v = 128;  // constant channels stay mid-gray
          if (hi > lo) {
            const float norm = (src[static_cast<std::size_t>(y) * W + x] - lo) / (hi - lo);
            v = static_cast<std::uint8_t>(std::clamp(std::floor(norm * 255.0f + 0.5f),
                                                     0.0f, 255.0f));
          }
          tile.set(ox + x, oy + y, v, v, v);
        }
      }
    }
    const auto path = out_dir / ("layer_" + name + ".ppm");
    write_ppm(tile, path);
    written.push_back(path);
  }
  return written;
}

}  // namespace fgan::probe
