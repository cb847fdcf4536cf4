#pragma once

#include <span>

#include "anatprior/autodiff/grid.hpp"
#include "anatprior/prior/segmentation.hpp"

namespace anatprior {

// Per-voxel label-frequency simplex, [H, W, L], every entry >= floor.
struct LocationPrior {
  Grid probs;
  double floor = 1e-7;

  std::size_t height() const { return probs.dim(0); }
  std::size_t width() const { return probs.dim(1); }
  std::size_t num_labels() const { return probs.dim(2); }

  Grid log_probs() const;
  void validate() const;
};

// probs[j, l] = max(freq_l(j), floor), renormalized per voxel.
LocationPrior compute_location_prior(std::span<const SegmentationMap> segs,
                                     double floor);

LocationPrior uniform_location_prior(std::size_t height, std::size_t width,
                                     std::size_t num_labels);

}  // namespace anatprior
