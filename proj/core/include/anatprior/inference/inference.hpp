#pragma once

#include <vector>

#include "anatprior/prior/segmentation.hpp"
#include "anatprior/random.hpp"
#include "anatprior/segmenter/segmenter.hpp"
#include "anatprior/synthdata/image.hpp"

namespace anatprior {

// argmax_l f(mu_{z|x})[j, l]; no sampling, ties to the lowest label.
SegmentationMap map_segment(const Image& x, const SegmenterModel& model);

// One label per voxel drawn from the categorical f [H, W, L].
SegmentationMap sample_categorical(const Grid& f, Rng& rng);

// z_k ~ q(z|x), s_k ~ f(z_k), k = 1..K. Each sample consumes the latent draw
// then the voxel draws from `rng`, in that order.
std::vector<SegmentationMap> sample_segmentations(const Image& x,
                                                  const SegmenterModel& model,
                                                  std::size_t K, Rng& rng);

struct UncertaintyMap {
  Grid entropy;  // [H, W], nats, within [0, log L]
};

// Mean of f(z_k) over K posterior samples, [H, W, L].
Grid marginal_probabilities(const Image& x, const SegmenterModel& model, std::size_t K,
                            Rng& rng);

// Per-voxel entropy of a categorical field, clipped to [0, log L].
UncertaintyMap entropy_map(const Grid& probs);

// Entropy of the Monte-Carlo marginal (default K = 50).
UncertaintyMap uncertainty_map(const Image& x, const SegmenterModel& model,
                               std::size_t K, Rng& rng);

// Entropy of the single categorical f(mu_{z|x}), posterior variance ignored.
UncertaintyMap uncertainty_at_mean(const Image& x, const SegmenterModel& model);

}  // namespace anatprior
