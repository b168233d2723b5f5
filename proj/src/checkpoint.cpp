#include "fgan/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace fgan::models {

using nlohmann::json;

// Accesses the private parameter stores of both models for snapshot/restore.
struct CheckpointCodec {
  static std::vector<std::pair<std::string, ad::Tensor>> collect(
      UNetGenerator& gen, PatchDiscriminator& disc) {
    std::vector<std::pair<std::string, ad::Tensor>> out;
    for (std::size_t i = 0; i < gen.params_.size(); ++i) {
      out.emplace_back("g." + gen.names_[i], gen.params_[i].detached());
    }
    for (std::size_t i = 0; i < disc.params_.size(); ++i) {
      out.emplace_back("d." + disc.names_[i], disc.params_[i].detached());
    }
    return out;
  }

  template <typename Model>
  static void load_into(Model& model, const char* prefix, const Checkpoint& ckpt) {
    for (std::size_t i = 0; i < model.params_.size(); ++i) {
      const std::string want = prefix + model.names_[i];
      const ad::Tensor* found = nullptr;
      for (const auto& [name, tensor] : ckpt.tensors) {
        if (name == want) {
          found = &tensor;
          break;
        }
      }
      if (!found) throw ParseError("checkpoint is missing tensor '" + want + "'");
      if (found->shape != model.params_[i].shape) {
        throw ParseError("checkpoint tensor '" + want + "' has shape " +
                         found->shape_str() + ", model expects " +
                         model.params_[i].shape_str());
      }
      model.params_[i].data = found->data;
    }
  }
};

Checkpoint Checkpoint::snapshot(UNetGenerator& gen, PatchDiscriminator& disc,
                                const CheckpointMeta& meta) {
  Checkpoint c;
  c.gen_spec = gen.spec();
  c.disc_spec = disc.spec();
  c.meta = meta;
  c.tensors = CheckpointCodec::collect(gen, disc);
  return c;
}

UNetGenerator Checkpoint::restore_generator() const {
  Rng rng(0);  // throwaway; every parameter is overwritten below
  UNetGenerator gen(gen_spec, rng);
  CheckpointCodec::load_into(gen, "g.", *this);
  return gen;
}

PatchDiscriminator Checkpoint::restore_discriminator() const {
  Rng rng(0);
  PatchDiscriminator disc(disc_spec, rng);
  CheckpointCodec::load_into(disc, "d.", *this);
  return disc;
}

namespace {

constexpr char kMagic[4] = {'F', 'G', 'A', 'N'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(const unsigned char* p) {
  const std::uint32_t bits = get_u32(p);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

const json& need(const json& j, const char* key, const std::string& scope) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError("checkpoint header missing field '" + scope + key + "'");
  }
  return *it;
}

template <typename T>
T need_as(const json& j, const char* key, const std::string& scope) {
  try {
    return need(j, key, scope).get<T>();
  } catch (const json::exception& e) {
    throw ParseError("checkpoint header field '" + scope + key + "': " + e.what());
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  json header;
  header["generator"] = {{"in_channels", ckpt.gen_spec.in_channels},
                         {"out_channels", ckpt.gen_spec.out_channels},
                         {"base_width", ckpt.gen_spec.base_width},
                         {"depth", ckpt.gen_spec.depth},
                         {"dropout_stages", ckpt.gen_spec.dropout_stages}};
  header["discriminator"] = {{"input_channels", ckpt.disc_spec.input_channels},
                             {"n_layers", ckpt.disc_spec.n_layers},
                             {"base_width", ckpt.disc_spec.base_width}};
  header["metadata"] = {{"epochs", ckpt.meta.epochs},
                        {"final_g_loss", ckpt.meta.final_g_loss},
                        {"final_d_loss", ckpt.meta.final_d_loss},
                        {"seed", ckpt.meta.seed},
                        {"image_size", ckpt.meta.image_size}};
  json dir = json::array();
  for (const auto& [name, tensor] : ckpt.tensors) {
    dir.push_back({{"name", name}, {"dims", tensor.shape}});
  }
  header["tensors"] = std::move(dir);
  const std::string header_str = header.dump();

  std::string blob;
  blob.append(kMagic, 4);
  put_u32(blob, kCheckpointVersion);
  put_u32(blob, static_cast<std::uint32_t>(header_str.size()));
  blob += header_str;
  for (const auto& [name, tensor] : ckpt.tensors) {
    for (float v : tensor.data) put_f32(blob, v);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());

  if (buf.size() < 12) throw ParseError("checkpoint truncated before header");
  if (std::memcmp(buf.data(), kMagic, 4) != 0) throw ParseError("checkpoint has bad magic");
  const std::uint32_t version = get_u32(buf.data() + 4);
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint format version " + std::to_string(version) +
                     ", expected " + std::to_string(kCheckpointVersion));
  }
  const std::uint32_t header_len = get_u32(buf.data() + 8);
  if (buf.size() - 12 < header_len) throw ParseError("checkpoint header truncated");

  json header;
  try {
    header = json::parse(buf.begin() + 12, buf.begin() + 12 + header_len);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint header is not valid json: ") + e.what());
  }

  Checkpoint ckpt;
  {
    const json& g = need(header, "generator", "");
    ckpt.gen_spec.in_channels = need_as<int>(g, "in_channels", "generator.");
    ckpt.gen_spec.out_channels = need_as<int>(g, "out_channels", "generator.");
    ckpt.gen_spec.base_width = need_as<int>(g, "base_width", "generator.");
    ckpt.gen_spec.depth = need_as<int>(g, "depth", "generator.");
    ckpt.gen_spec.dropout_stages = need_as<std::vector<int>>(g, "dropout_stages", "generator.");
  }
  {
    const json& d = need(header, "discriminator", "");
    ckpt.disc_spec.input_channels = need_as<int>(d, "input_channels", "discriminator.");
    ckpt.disc_spec.n_layers = need_as<int>(d, "n_layers", "discriminator.");
    ckpt.disc_spec.base_width = need_as<int>(d, "base_width", "discriminator.");
  }
  {
    const json& m = need(header, "metadata", "");
    ckpt.meta.epochs = need_as<int>(m, "epochs", "metadata.");
    ckpt.meta.final_g_loss = need_as<float>(m, "final_g_loss", "metadata.");
    ckpt.meta.final_d_loss = need_as<float>(m, "final_d_loss", "metadata.");
    ckpt.meta.seed = need_as<std::uint64_t>(m, "seed", "metadata.");
    ckpt.meta.image_size = need_as<int>(m, "image_size", "metadata.");
  }

  const json& dir = need(header, "tensors", "");
  if (!dir.is_array()) throw ParseError("checkpoint header field 'tensors' must be an array");

  std::size_t pos = 12 + header_len;
  for (const auto& entry : dir) {
    const std::string name = need_as<std::string>(entry, "name", "tensors[].");
    const std::vector<int> dims = need_as<std::vector<int>>(entry, "dims", "tensors[].");
    std::int64_t count = 1;
    for (int e : dims) {
      if (e < 1) throw ParseError("checkpoint tensor '" + name + "' has non-positive dim");
      count *= e;
    }
    const std::size_t bytes = static_cast<std::size_t>(count) * 4;
    if (buf.size() - pos < bytes) {
      throw ParseError("truncated tensor payload for '" + name + "'");
    }
    ad::Tensor t(dims);
    for (std::int64_t i = 0; i < count; ++i) t.data[i] = get_f32(buf.data() + pos + i * 4);
    pos += bytes;
    ckpt.tensors.emplace_back(name, std::move(t));
  }
  if (pos != buf.size()) {
    throw ParseError("checkpoint has " + std::to_string(buf.size() - pos) +
                     " trailing bytes after tensor payloads");
  }
  return ckpt;
}

}  // namespace fgan::models
