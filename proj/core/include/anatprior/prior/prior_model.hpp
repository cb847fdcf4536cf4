#pragma once

#include <span>

#include "anatprior/autodiff/tape.hpp"
#include "anatprior/prior/checkpoint.hpp"
#include "anatprior/prior/gaussian.hpp"
#include "anatprior/prior/location_prior.hpp"
#include "anatprior/prior/network.hpp"
#include "anatprior/prior/segmentation.hpp"
#include "anatprior/training.hpp"

namespace anatprior {

// Auto-encoding anatomical prior: q(z|s) encoder, p(s|z) decoder and the
// voxel-wise location prior folded into the decoder's last layer.
struct PriorModel {
  ArchitectureConfig arch;  // arch.channels is the label count
  double prob_floor = 1e-7;
  ConvEncoder encoder;
  ConvDecoder decoder;
  LocationPrior location;

  std::size_t num_labels() const noexcept { return arch.channels; }
};

// Fresh model with seeded weights.
PriorModel make_prior_model(const ArchitectureConfig& arch, double prob_floor,
                            LocationPrior location, Rng& rng);

// floor(softmax_l(log sigmoid(logits) + log p_loc)): sigmoid decoder output
// multiplied by the location prior, renormalized per voxel, then floored.
ad::Var segmentation_head(ad::Var logits, const Grid& log_location,
                          double prob_floor);

// Decoder + segmentation head on the tape. The non-const decoder overload
// tracks trainable decoder parameters.
ad::Var decode_probabilities(ad::Var z, ConvDecoder& decoder,
                             const LocationPrior& loc, double prob_floor);
ad::Var decode_probabilities(ad::Var z, const ConvDecoder& decoder,
                             const LocationPrior& loc, double prob_floor);

GaussianPosterior encode_segmentation(const SegmentationMap& s,
                                      const PriorModel& model);

// [H, W, L] categorical f_{j,l}(z), location prior included.
Grid decode_latent(const LatentCode& z, const ConvDecoder& decoder,
                   const LocationPrior& loc, double prob_floor);

struct PriorLossTerms {
  double kl = 0.0;
  double cross_entropy = 0.0;
  double total = 0.0;
};

// KL[q(z|s) || N(0, I)] - sum_j log f_{j, s[j]}(z).
PriorLossTerms prior_loss(const SegmentationMap& s, const LatentCode& z,
                          const PriorModel& model);

// KL + cross-entropy for one map with latent noise eta (z = mean +
// sqrt(var) eta), tracking the model's trainable parameters.
ObjectiveTerms prior_objective(ad::Tape& tape, const SegmentationMap& s,
                               PriorModel& model, const Grid& eta);

struct PriorTrainingResult {
  PriorModel model;
  TrainingTrace trace;
};

// SGVB over mini-batches with one reparametrized latent sample per datum.
// The location prior is computed from `segs`.
PriorTrainingResult train_prior(std::span<const SegmentationMap> segs,
                                const ArchitectureConfig& arch, double prob_floor,
                                const TrainingConfig& cfg, Rng& rng);

// Continues training an existing model in place.
TrainingTrace fit_prior(PriorModel& model, std::span<const SegmentationMap> segs,
                        const TrainingConfig& cfg, Rng& rng);

// Checkpoint kind "prior": architecture, floor, encoder/decoder weights and
// the location prior.
Checkpoint prior_to_checkpoint(const PriorModel& model);
PriorModel prior_from_checkpoint(const Checkpoint& ckpt);
void save_prior(const std::filesystem::path& path, const PriorModel& model);
PriorModel load_prior(const std::filesystem::path& path);

// Location prior tensors and floor under `prefix`.
void put_location_prior(Checkpoint& ckpt, const std::string& prefix,
                        const LocationPrior& loc);
LocationPrior get_location_prior(const Checkpoint& ckpt, const std::string& prefix);

}  // namespace anatprior
