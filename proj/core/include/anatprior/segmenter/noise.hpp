#pragma once

#include <span>

#include "anatprior/synthdata/image.hpp"

namespace anatprior {

// Immerkaer's estimate: sqrt(pi / 2) / (6 (H - 2) (W - 2)) * sum |x * M| over
// interior voxels, M = [1 -2 1; -2 4 -2; 1 -2 1]. Needs H, W >= 3.
double estimate_noise_sigma(const Image& x);

// Median of the per-image estimates.
double estimate_noise_sigma(std::span<const Image> images);

}  // namespace anatprior
