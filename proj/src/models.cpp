#include "fgan/models.hpp"

#include <algorithm>
#include <cmath>

namespace fgan::models {

namespace {

constexpr float kDropoutP = 0.5f;
constexpr float kInitStd = 0.02f;

int capped_width(int base, int stage) {
  const long w = static_cast<long>(base) << stage;
  return static_cast<int>(std::min<long>(w, 8L * base));
}

ad::Tensor gaussian_tensor(std::vector<int> shape, Rng& rng, float stddev) {
  ad::Tensor t(std::move(shape));
  for (auto& v : t.data) v = rng.normal(0.0f, stddev);
  t.requires_grad = true;
  return t;
}

ad::Tensor const_tensor(std::vector<int> shape, float value) {
  ad::Tensor t(std::move(shape), value);
  t.requires_grad = true;
  return t;
}

void tap_stage(const ForwardOptions& opts, const std::string& name,
               const ad::Tensor& t) {
  if (opts.tap) (*opts.tap)(name, t);
}

}  // namespace

void GeneratorSpec::validate() const {
  if (in_channels < 1 || out_channels < 1) throw ConfigError("generator channels must be >= 1");
  if (base_width < 1) throw ConfigError("generator base_width must be >= 1");
  if (depth < 2) throw ConfigError("generator depth must be >= 2");
  for (int s : dropout_stages) {
    if (s < 0 || s >= depth - 1) {
      throw ConfigError("dropout stage " + std::to_string(s) +
                        " outside decoder stages [0, " + std::to_string(depth - 1) + ")");
    }
  }
}

void GeneratorSpec::validate_input_extent(int extent) const {
  const int block = 1 << depth;
  if (extent < block || extent % block != 0) {
    throw ConfigError("input extent " + std::to_string(extent) +
                      " is not divisible by 2^depth = " + std::to_string(block));
  }
}

void DiscriminatorSpec::validate() const {
  if (input_channels < 1) throw ConfigError("discriminator input_channels must be >= 1");
  if (n_layers < 1) throw ConfigError("discriminator n_layers must be >= 1");
  if (base_width < 1) throw ConfigError("discriminator base_width must be >= 1");
}

int DiscriminatorSpec::logit_extent(int input_extent) const {
  int e = input_extent;
  for (int i = 0; i < n_layers; ++i) {
    const int num = e + 2 - 4;
    if (num < 0 || num % 2 != 0) {
      throw ConfigError("discriminator cannot tile input extent " +
                        std::to_string(input_extent) + " through stride-2 stage " +
                        std::to_string(i) + " (too small or misaligned)");
    }
    e = num / 2 + 1;
  }
  for (int i = 0; i < 2; ++i) {
    e = e + 2 - 4 + 1;
    if (e < 1) {
      throw ConfigError("discriminator input extent " + std::to_string(input_extent) +
                        " is smaller than the receptive field");
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

UNetGenerator::UNetGenerator(GeneratorSpec spec, Rng& rng) : spec_(std::move(spec)) {
  spec_.validate();
  const int d = spec_.depth;

  auto push = [&](const std::string& name, ad::Tensor t) {
    params_.push_back(std::move(t));
    names_.push_back(name);
    return static_cast<int>(params_.size()) - 1;
  };

  std::vector<int> enc_w(d);
  for (int i = 0; i < d; ++i) enc_w[i] = capped_width(spec_.base_width, i);

  for (int i = 0; i < d; ++i) {
    Stage st;
    const int in_ch = i == 0 ? spec_.in_channels : enc_w[i - 1];
    const std::string base = "enc" + std::to_string(i + 1);
    st.weight = push(base + ".weight", gaussian_tensor({enc_w[i], in_ch, 4, 4}, rng, kInitStd));
    st.bias = push(base + ".bias", const_tensor({enc_w[i]}, 0.0f));
    if (i > 0 && i < d - 1) {  // first stage and bottleneck run without norm
      st.gamma = push(base + ".gamma", const_tensor({enc_w[i]}, 1.0f));
      st.beta = push(base + ".beta", const_tensor({enc_w[i]}, 0.0f));
    }
    enc_.push_back(st);
  }

  int prev_out = enc_w[d - 1];
  for (int j = 0; j < d; ++j) {
    Stage st;
    const int in_ch = j == 0 ? prev_out : prev_out + enc_w[d - 1 - j];
    const int out_ch = j < d - 1 ? enc_w[d - 2 - j] : spec_.out_channels;
    const std::string base = "dec" + std::to_string(j + 1);
    st.weight = push(base + ".weight", gaussian_tensor({in_ch, out_ch, 4, 4}, rng, kInitStd));
    st.bias = push(base + ".bias", const_tensor({out_ch}, 0.0f));
    if (j < d - 1) {
      st.gamma = push(base + ".gamma", const_tensor({out_ch}, 1.0f));
      st.beta = push(base + ".beta", const_tensor({out_ch}, 0.0f));
      st.dropout = std::find(spec_.dropout_stages.begin(), spec_.dropout_stages.end(), j) !=
                   spec_.dropout_stages.end();
    }
    dec_.push_back(st);
    prev_out = out_ch;
  }
}

ad::Tensor UNetGenerator::forward(const ad::Tensor& input, const ForwardOptions& opts) const {
  if (input.rank() != 4 || input.shape[1] != spec_.in_channels) {
    throw ShapeError("generator expects NxCxHxW input with " +
                     std::to_string(spec_.in_channels) + " channels, got " +
                     input.shape_str());
  }
  spec_.validate_input_extent(input.shape[2]);
  spec_.validate_input_extent(input.shape[3]);

  bool any_dropout = false;
  for (const auto& st : dec_) any_dropout |= st.dropout;
  if (opts.training && any_dropout && opts.dropout_rng == nullptr) {
    throw ContractError("training forward needs a dropout rng");
  }

  const int d = spec_.depth;
  std::vector<ad::Tensor> skips;
  skips.reserve(d);
  ad::Tensor h = input;
  for (int i = 0; i < d; ++i) {
    const auto& st = enc_[i];
    h = ad::conv2d(h, params_[st.weight], params_[st.bias], 2, 1);
    if (st.gamma >= 0) h = ad::instance_norm(h, params_[st.gamma], params_[st.beta]);
    h = ad::activation(h, ad::Act::LeakyRelu);
    tap_stage(opts, "enc" + std::to_string(i + 1), h);
    skips.push_back(h);
  }

  for (int j = 0; j < d; ++j) {
    const auto& st = dec_[j];
    ad::Tensor in = h;
    if (j > 0) {
      const ad::Tensor& skip = skips[d - 1 - j];
      if (opts.skip_disable_mask & (1u << j)) {
        in = ad::concat_channels(h, ad::Tensor(skip.shape, 0.0f));
      } else {
        in = ad::concat_channels(h, skip);
      }
    }
    h = ad::conv_transpose2d(in, params_[st.weight], params_[st.bias], 2, 1);
    if (j < d - 1) {
      h = ad::instance_norm(h, params_[st.gamma], params_[st.beta]);
      if (st.dropout && opts.training) {
        h = ad::dropout(h, kDropoutP, true, *opts.dropout_rng);
      }
      h = ad::activation(h, ad::Act::Relu);
    } else {
      h = ad::activation(h, ad::Act::Tanh);
    }
    tap_stage(opts, "dec" + std::to_string(j + 1), h);
  }
  tap_stage(opts, "out", h);
  return h;
}

std::vector<NamedParam> UNetGenerator::params() {
  std::vector<NamedParam> out;
  out.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) out.push_back({names_[i], &params_[i]});
  return out;
}

std::vector<std::string> UNetGenerator::layer_names() const {
  std::vector<std::string> names;
  for (int i = 0; i < spec_.depth; ++i) names.push_back("enc" + std::to_string(i + 1));
  for (int j = 0; j < spec_.depth; ++j) names.push_back("dec" + std::to_string(j + 1));
  names.push_back("out");
  return names;
}

std::int64_t UNetGenerator::param_count() const {
  std::int64_t n = 0;
  for (const auto& p : params_) n += p.numel();
  return n;
}

// ---------------------------------------------------------------------------
// Discriminator
// ---------------------------------------------------------------------------

PatchDiscriminator::PatchDiscriminator(DiscriminatorSpec spec, Rng& rng)
    : spec_(std::move(spec)) {
  spec_.validate();

  auto push = [&](const std::string& name, ad::Tensor t) {
    params_.push_back(std::move(t));
    names_.push_back(name);
    return static_cast<int>(params_.size()) - 1;
  };

  // No normalisation layers here: every logit must depend only on its input
  // patch, and instance statistics would couple it to the whole frame.
  const int n = spec_.n_layers;
  int in_ch = spec_.input_channels;
  for (int i = 0; i <= n + 1; ++i) {
    Stage st;
    const bool logit_layer = i == n + 1;
    const int out_ch = logit_layer ? 1 : capped_width(spec_.base_width, i);
    st.stride = i < n ? 2 : 1;
    const std::string base = "c" + std::to_string(i + 1);
    st.weight = push(base + ".weight", gaussian_tensor({out_ch, in_ch, 4, 4}, rng, kInitStd));
    st.bias = push(base + ".bias", const_tensor({out_ch}, 0.0f));
    stages_.push_back(st);
    in_ch = out_ch;
  }
}

ad::Tensor PatchDiscriminator::forward(const ad::Tensor& input) const {
  if (input.rank() != 4 || input.shape[1] != spec_.input_channels) {
    throw ShapeError("discriminator expects NxCxHxW input with " +
                     std::to_string(spec_.input_channels) + " channels, got " +
                     input.shape_str());
  }
  spec_.logit_extent(std::min(input.shape[2], input.shape[3]));

  ad::Tensor h = input;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const auto& st = stages_[i];
    h = ad::conv2d(h, params_[st.weight], params_[st.bias], st.stride, 1);
    if (i + 1 == stages_.size()) break;  // raw logit map
    h = ad::activation(h, ad::Act::LeakyRelu);
  }
  return h;
}

std::vector<NamedParam> PatchDiscriminator::params() {
  std::vector<NamedParam> out;
  out.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) out.push_back({names_[i], &params_[i]});
  return out;
}

std::int64_t PatchDiscriminator::param_count() const {
  std::int64_t n = 0;
  for (const auto& p : params_) n += p.numel();
  return n;
}

// ---------------------------------------------------------------------------
// Losses and image mapping
// ---------------------------------------------------------------------------

ad::Tensor generator_loss(const ad::Tensor& d_fake_logits, const ad::Tensor& fake,
                          const ad::Tensor& real, float lambda_l1) {
  if (lambda_l1 < 0.0f) throw ConfigError("lambda_l1 must be >= 0");
  ad::Tensor adv = ad::bce_with_logits(d_fake_logits, 1.0f);
  return ad::add(adv, ad::scale(ad::l1_loss(fake, real), lambda_l1));
}

ad::Tensor discriminator_loss(const ad::Tensor& d_real_logits,
                              const ad::Tensor& d_fake_logits) {
  return ad::scale(ad::add(ad::bce_with_logits(d_real_logits, 1.0f),
                           ad::bce_with_logits(d_fake_logits, 0.0f)),
                   0.5f);
}

ad::Tensor image_to_tensor(const Image& image) {
  ad::Tensor t({1, 3, image.height, image.width});
  const std::size_t plane = static_cast<std::size_t>(image.height) * image.width;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const auto rgb = image.rgb(x, y);
      const std::size_t p = static_cast<std::size_t>(y) * image.width + x;
      for (int c = 0; c < 3; ++c) {
        t.data[c * plane + p] = static_cast<float>(rgb[c]) / 127.5f - 1.0f;
      }
    }
  }
  return t;
}

Image tensor_to_image(const ad::Tensor& t) {
  if (t.rank() != 4 || t.shape[0] != 1 || t.shape[1] != 3) {
    throw ShapeError("tensor_to_image expects a 1x3xHxW tensor, got " + t.shape_str());
  }
  const int h = t.shape[2], w = t.shape[3];
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      std::uint8_t rgb[3];
      for (int c = 0; c < 3; ++c) {
        const float v = (t.data[c * plane + p] + 1.0f) * 127.5f;
        const float r = std::floor(v + 0.5f);  // round half up
        rgb[c] = static_cast<std::uint8_t>(std::clamp(r, 0.0f, 255.0f));
      }
      img.set(x, y, rgb[0], rgb[1], rgb[2]);
    }
  }
  return img;
}

Image enhance(const UNetGenerator& gen, const Image& visual, int trained_size) {
  if (visual.width != trained_size || visual.height != trained_size) {
    throw ShapeError("enhance: frame is " + std::to_string(visual.width) + "x" +
                     std::to_string(visual.height) + " but the model was trained at " +
                     std::to_string(trained_size) + "x" + std::to_string(trained_size) +
                     "; resize is not implicit");
  }
  ad::Tensor out = gen.forward(image_to_tensor(visual));
  return tensor_to_image(out);
}

}  // namespace fgan::models
