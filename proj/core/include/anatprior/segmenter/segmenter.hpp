#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "anatprior/autodiff/tape.hpp"
#include "anatprior/prior/checkpoint.hpp"
#include "anatprior/prior/gaussian.hpp"
#include "anatprior/prior/prior_model.hpp"
#include "anatprior/synthdata/image.hpp"
#include "anatprior/training.hpp"

namespace anatprior {

// Per-label Gaussian appearance: x[j] ~ N(mu_l, sigma_l^2) given s[j] = l.
// mu is learned, sigma stays fixed during training.
struct AppearanceParams {
  ad::Parameter mu;  // [L]
  std::vector<double> sigma;

  AppearanceParams() = default;
  AppearanceParams(std::vector<double> mu_values, std::vector<double> sigma_values);

  std::size_t num_labels() const noexcept { return sigma.size(); }
  void validate() const;
};

// L values spread evenly over [0, 1].
std::vector<double> evenly_spaced_means(std::size_t num_labels);

// Image encoder q(z|x) on top of a frozen copy of the prior's decoder and
// location prior.
struct SegmenterModel {
  ArchitectureConfig image_arch;  // channels = 1
  double prob_floor = 1e-7;
  ConvEncoder encoder;
  ConvDecoder decoder;
  LocationPrior location;
  AppearanceParams appearance;
  std::uint32_t decoder_checksum = 0;  // of the prior decoder it was built from

  std::size_t num_labels() const noexcept { return location.num_labels(); }
  // Throws ContractError if the decoder no longer matches decoder_checksum.
  void verify_decoder() const;
};

// Image encoder architecture mirroring the prior's, with one input channel.
ArchitectureConfig image_architecture(const ArchitectureConfig& prior_arch);

// Fresh image encoder, mu evenly spaced, the given sigma (one per label).
SegmenterModel make_segmenter(const PriorModel& prior, std::vector<double> sigma,
                              Rng& rng);

GaussianPosterior encode_image(const Image& x, const SegmenterModel& model);

// xhat[j] = sum_l f[j, l] mu_l.
Grid reconstruct_intensity(const Grid& f, const AppearanceParams& app);

// f_{j,l}(z) through the frozen decoder and location prior.
Grid decode_segmenter(const LatentCode& z, const SegmenterModel& model);

struct SupervisedLossTerms {
  double kl = 0.0;
  double cross_entropy = 0.0;
  double intensity = 0.0;  // sum_j (x[j] - mu_{s[j]})^2 / (2 sigma_{s[j]}^2)
  double total = 0.0;
};

// KL[q(z|x) || N(0, I)] + CE(s, f(z)) + intensity.
SupervisedLossTerms supervised_loss(const Image& x, const SegmentationMap& s,
                                    const LatentCode& z, const SegmenterModel& model);

struct UnsupervisedLossTerms {
  double kl = 0.0;
  double intensity = 0.0;       // sum_j sum_l f_{j,l} (x[j] - mu_l)^2 / (2 sigma_l^2)
  double log_normalizer = 0.0;  // sum_j sum_l f_{j,l} (log sigma_l + log(2 pi) / 2)
  double total = 0.0;
};

// KL + E_{p(s|z)}[-log p(x|s)], the Jensen upper bound on -log p(x|z) plus KL.
UnsupervisedLossTerms unsupervised_loss(const Image& x, const LatentCode& z,
                                        const SegmenterModel& model);

// Terms of the expected NLL for a given categorical f [H, W, L].
UnsupervisedLossTerms expected_intensity_terms(const Image& x, const Grid& f,
                                               const AppearanceParams& app);

// Tape-level bound for one image with latent noise eta; data = expected
// Gaussian NLL (intensity + log normalizer). Tracks the trainable encoder
// weights and mu; the decoder enters as constants.
ObjectiveTerms unsupervised_objective(ad::Tape& tape, const Image& x,
                                      SegmenterModel& model, const Grid& eta);

// Tape-level supervised loss; data = cross-entropy + intensity.
ObjectiveTerms supervised_objective(ad::Tape& tape, const Image& x,
                                    const SegmentationMap& s, SegmenterModel& model,
                                    const Grid& eta);

// Checkpoint kind "segmenter".
Checkpoint segmenter_to_checkpoint(const SegmenterModel& model);
SegmenterModel segmenter_from_checkpoint(const Checkpoint& ckpt);
void save_segmenter(const std::filesystem::path& path, const SegmenterModel& model);
SegmenterModel load_segmenter(const std::filesystem::path& path);

}  // namespace anatprior
