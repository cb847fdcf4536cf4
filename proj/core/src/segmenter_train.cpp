#include <algorithm>
#include <cmath>

#include "anatprior/autodiff/ops.hpp"
#include "anatprior/errors.hpp"
#include "anatprior/segmenter/noise.hpp"
#include "anatprior/segmenter/train.hpp"

namespace anatprior {

namespace {

void check_images(std::span<const Image> images, const ArchitectureConfig& arch) {
  if (images.empty()) throw ContractError("training needs at least one image");
  for (const Image& x : images) {
    if (x.pixels.rank() != 2 || x.height() != arch.height || x.width() != arch.width) {
      throw DimensionError("training image does not match the configured H x W");
    }
  }
}

}  // namespace

PretrainResult pretrain_image_encoder(std::span<const Image> images,
                                      const ArchitectureConfig& image_arch,
                                      const PretrainConfig& cfg, Rng& rng) {
  if (image_arch.channels != 1) throw ConfigError("image encoder takes one channel");
  if (!(cfg.recon_sigma > 0.0)) throw ConfigError("recon_sigma must be > 0");
  check_images(images, image_arch);
  PretrainResult result{ConvEncoder(image_arch, rng), {}};
  ConvDecoder decoder(image_arch, rng);
  std::vector<ad::Parameter*> params = result.encoder.parameters();
  for (ad::Parameter* p : decoder.parameters()) params.push_back(p);

  result.trace = run_epochs(
      images.size(), cfg.training, params, "reconstruction", rng,
      [&](std::size_t i, double inv_batch) {
        const Image& x = images[i];
        ad::Tape tape;
        auto post = result.encoder.forward(tape, tape.constant(x.as_channels()));
        const Grid eta({image_arch.latent_dim},
                       draw_standard_normal(image_arch.latent_dim, rng));
        ad::Var z = ad::reparameterize(post.mean, post.var, eta);
        ad::Var xhat = ad::sigmoid(decoder.forward(tape, z));
        ad::Var kl = ad::kl_standard_normal(post.mean, post.var);
        ad::Var rec = ad::gaussian_nll(xhat, x.pixels, cfg.recon_sigma);
        const double kl_v = kl.value()[0], rec_v = rec.value()[0];
        check_finite_terms("pretrain_image_encoder", kl_v + rec_v, kl_v, rec_v,
                           "reconstruction");
        tape.backward(ad::scale(ad::add(kl, rec), inv_batch));
        return std::pair{kl_v, rec_v};
      });
  return result;
}

SigmaMode parse_sigma_mode(std::string_view text) {
  if (text == "estimated") return SigmaMode::estimated;
  if (text == "per-label") return SigmaMode::per_label;
  if (text == "fixed") return SigmaMode::fixed;
  throw ConfigError("unknown sigma mode '" + std::string(text) +
                    "' (expected estimated, per-label or fixed)");
}

std::string_view to_string(SigmaMode mode) {
  switch (mode) {
    case SigmaMode::estimated: return "estimated";
    case SigmaMode::per_label: return "per-label";
    case SigmaMode::fixed: return "fixed";
  }
  return "estimated";
}

std::vector<double> resolve_sigma(std::span<const Image> images,
                                  const UnsupervisedConfig& cfg,
                                  std::size_t num_labels) {
  std::vector<double> sigma;
  switch (cfg.sigma_mode) {
    case SigmaMode::estimated: {
      const double s = estimate_noise_sigma(images);
      if (!(s > 0.0)) {
        throw ConfigError("estimated noise sigma is zero; use a fixed sigma");
      }
      sigma.assign(num_labels, s);
      break;
    }
    case SigmaMode::per_label:
      if (cfg.sigma_values.size() != num_labels) {
        throw ConfigError("per-label sigma needs " + std::to_string(num_labels) +
                          " values");
      }
      sigma = cfg.sigma_values;
      break;
    case SigmaMode::fixed:
      if (cfg.sigma_values.size() != 1) {
        throw ConfigError("fixed sigma needs exactly one value");
      }
      sigma.assign(num_labels, cfg.sigma_values[0]);
      break;
  }
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("sigma must be positive");
  }
  return sigma;
}

TrainingTrace fit_unsupervised(SegmenterModel& model, std::span<const Image> images,
                               const TrainingConfig& cfg, bool train_mu,
                               bool train_encoder, Rng& rng) {
  check_images(images, model.image_arch);
  model.appearance.validate();
  model.verify_decoder();

  model.encoder.set_trainable(train_encoder);
  model.appearance.mu.trainable = train_mu;
  std::vector<ad::Parameter*> params = model.encoder.parameters();
  params.push_back(&model.appearance.mu);

  const std::size_t d = model.image_arch.latent_dim;
  TrainingTrace trace = run_epochs(
      images.size(), cfg, params, "intensity", rng, [&](std::size_t i, double inv_batch) {
        ad::Tape tape;
        const Grid eta({d}, draw_standard_normal(d, rng));
        const ObjectiveTerms obj = unsupervised_objective(tape, images[i], model, eta);
        const double kl = obj.kl.value()[0], nll = obj.data.value()[0];
        check_finite_terms("train_unsupervised", kl + nll, kl, nll, "intensity");
        tape.backward(ad::scale(obj.total, inv_batch));
        return std::pair{kl, nll};
      });

  model.encoder.set_trainable(true);
  model.appearance.mu.trainable = true;
  model.verify_decoder();
  return trace;
}

SegmenterTrainingResult train_unsupervised(std::span<const Image> images,
                                           const PriorModel& prior,
                                           const UnsupervisedConfig& cfg, Rng& rng) {
  check_images(images, prior.arch);
  SegmenterTrainingResult result{
      make_segmenter(prior, resolve_sigma(images, cfg, prior.num_labels()), rng), {}};
  if (cfg.initial_encoder) {
    if (!(cfg.initial_encoder->config() == result.model.image_arch)) {
      throw ConfigError("initial encoder architecture does not match the prior");
    }
    result.model.encoder = *cfg.initial_encoder;
  }
  result.trace = fit_unsupervised(result.model, images, cfg.training, cfg.train_mu,
                                  cfg.train_encoder, rng);
  return result;
}

}  // namespace anatprior
