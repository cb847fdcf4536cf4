#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "anatprior/prior/network.hpp"
#include "anatprior/prior/prior_model.hpp"
#include "anatprior/segmenter/segmenter.hpp"
#include "anatprior/synthdata/image.hpp"
#include "anatprior/training.hpp"

namespace anatprior {

struct PretrainConfig {
  TrainingConfig training;
  // Noise scale of the image VAE's Gaussian reconstruction term.
  double recon_sigma = 0.1;
};

struct PretrainResult {
  ConvEncoder encoder;
  TrainingTrace trace;
};

// Image VAE: the encoder is kept, its decoder (sigmoid output) is discarded.
PretrainResult pretrain_image_encoder(std::span<const Image> images,
                                      const ArchitectureConfig& image_arch,
                                      const PretrainConfig& cfg, Rng& rng);

enum class SigmaMode { estimated, per_label, fixed };

SigmaMode parse_sigma_mode(std::string_view text);
std::string_view to_string(SigmaMode mode);

struct UnsupervisedConfig {
  TrainingConfig training;
  SigmaMode sigma_mode = SigmaMode::estimated;
  // per_label: one value per label; fixed: a single shared value.
  std::vector<double> sigma_values;
  // false keeps mu (or the encoder) at its initial values.
  bool train_mu = true;
  bool train_encoder = true;
  std::optional<ConvEncoder> initial_encoder;
};

// sigma_l for every label according to cfg (median Immerkaer estimate for
// the estimated mode).
std::vector<double> resolve_sigma(std::span<const Image> images,
                                  const UnsupervisedConfig& cfg,
                                  std::size_t num_labels);

struct SegmenterTrainingResult {
  SegmenterModel model;
  TrainingTrace trace;
};

// Adadelta on the unsupervised bound over encoder weights and mu; decoder
// and location prior frozen.
SegmenterTrainingResult train_unsupervised(std::span<const Image> images,
                                           const PriorModel& prior,
                                           const UnsupervisedConfig& cfg, Rng& rng);

// Continues training in place.
TrainingTrace fit_unsupervised(SegmenterModel& model, std::span<const Image> images,
                               const TrainingConfig& cfg, bool train_mu,
                               bool train_encoder, Rng& rng);

}  // namespace anatprior
