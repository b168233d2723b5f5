#include "fgan/train.hpp"

#include <cmath>

#include "fgan/optim.hpp"

namespace fgan::models {

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (lr <= 0.0f) throw ConfigError("lr must be > 0");
  if (lambda_l1 < 0.0f) throw ConfigError("lambda_l1 must be >= 0");
  gen.validate();
  disc.validate();
  gen.validate_input_extent(image_size);
}

bool EpochLosses::finite() const {
  return std::isfinite(g_total) && std::isfinite(g_adv) && std::isfinite(g_l1) &&
         std::isfinite(d);
}

namespace {

struct ParamGroup {
  std::vector<NamedParam> params;
  std::vector<ad::AdamState> states;

  ParamGroup(std::vector<NamedParam> p, float lr, float beta1) : params(std::move(p)) {
    states.reserve(params.size());
    for (const auto& np : params) {
      states.push_back(ad::AdamState::for_param(*np.tensor, lr, beta1));
    }
  }

  void step(const ad::Tape& tape) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (tape.has_grad(*params[i].tensor)) {
        ad::adam_step(*params[i].tensor, tape.grad(*params[i].tensor), states[i]);
      }
    }
  }
};

}  // namespace

TrainOutput train(std::span<const ImagePair> dataset, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw DataError("training dataset is empty");
  for (const auto& pair : dataset) {
    if (pair.visual.width != cfg.image_size || pair.visual.height != cfg.image_size ||
        !pair.visual.same_size(pair.thermal)) {
      throw DataError("all training frames must be " + std::to_string(cfg.image_size) + "x" +
                      std::to_string(cfg.image_size) + " visual/thermal pairs");
    }
  }

  Rng root(cfg.seed);
  Rng init_g = root.derive("generator-init");
  Rng init_d = root.derive("discriminator-init");
  Rng dropout_rng = root.derive("dropout");
  Rng shuffle_rng = root.derive("shuffle");

  UNetGenerator gen(cfg.gen, init_g);
  PatchDiscriminator disc(cfg.disc, init_d);
  // The param pointers stay valid across the moves into TrainOutput below:
  // moving a model transfers its parameter vector's storage.
  ParamGroup g_group(gen.params(), cfg.lr, cfg.beta1);
  ParamGroup d_group(disc.params(), cfg.lr, cfg.beta1);

  // Normalise once up front; the loop re-reads these every epoch.
  std::vector<ad::Tensor> xs, ys;
  xs.reserve(dataset.size());
  ys.reserve(dataset.size());
  for (const auto& pair : dataset) {
    xs.push_back(image_to_tensor(pair.visual));
    ys.push_back(image_to_tensor(pair.thermal));
  }

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainOutput out{std::move(gen), std::move(disc), {}, false};
  ForwardOptions train_fwd;
  train_fwd.training = true;
  train_fwd.dropout_rng = &dropout_rng;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.next_int(0, static_cast<int>(i) - 1)]);
    }

    EpochLosses ep;
    for (std::size_t idx : order) {
      const ad::Tensor& x = xs[idx];
      const ad::Tensor& y = ys[idx];

      ad::Tape g_tape;
      ad::Tensor fake = out.generator.forward(x, train_fwd);

      double d_loss_val;
      {
        ad::Tape d_tape;
        ad::Tensor d_real = out.discriminator.forward(ad::concat_channels(x, y));
        ad::Tensor d_fake = out.discriminator.forward(ad::concat_channels(x, fake.detached()));
        ad::Tensor d_loss = discriminator_loss(d_real, d_fake);
        d_loss_val = d_loss.item();
        d_tape.backward(d_loss);
        d_group.step(d_tape);
      }

      ad::Tensor d_fake2 = out.discriminator.forward(ad::concat_channels(x, fake));
      ad::Tensor adv = ad::bce_with_logits(d_fake2, 1.0f);
      ad::Tensor l1 = ad::l1_loss(fake, y);
      ad::Tensor g_loss = ad::add(adv, ad::scale(l1, cfg.lambda_l1));
      g_tape.backward(g_loss);
      g_group.step(g_tape);

      ep.d += d_loss_val;
      ep.g_adv += adv.item();
      ep.g_l1 += l1.item();
      ep.g_total += g_loss.item();
    }

    const double n = static_cast<double>(order.size());
    ep.d /= n;
    ep.g_adv /= n;
    ep.g_l1 /= n;
    ep.g_total /= n;
    out.history.push_back(ep);
    if (!ep.finite()) {
      out.diverged = true;
      break;
    }
  }
  return out;
}

Checkpoint make_checkpoint(TrainOutput& out, const TrainConfig& cfg) {
  CheckpointMeta meta;
  meta.epochs = static_cast<int>(out.history.size());
  meta.seed = cfg.seed;
  meta.image_size = cfg.image_size;
  if (!out.history.empty()) {
    meta.final_g_loss = static_cast<float>(out.history.back().g_total);
    meta.final_d_loss = static_cast<float>(out.history.back().d);
  }
  return Checkpoint::snapshot(out.generator, out.discriminator, meta);
}

double eval_l1(const UNetGenerator& gen, std::span<const ImagePair> pairs) {
  if (pairs.empty()) throw DataError("eval_l1 needs at least one pair");
  double total = 0.0;
  for (const auto& pair : pairs) {
    ad::Tensor fake = gen.forward(image_to_tensor(pair.visual));
    total += ad::l1_loss(fake, image_to_tensor(pair.thermal)).item();
  }
  return total / static_cast<double>(pairs.size());
}

}  // namespace fgan::models
