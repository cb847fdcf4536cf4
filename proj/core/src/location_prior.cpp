#include "anatprior/prior/location_prior.hpp"

#include <algorithm>
#include <cmath>

#include "anatprior/errors.hpp"

namespace anatprior {

Grid LocationPrior::log_probs() const {
  Grid out = probs;
  for (double& v : out.values()) v = std::log(v);
  return out;
}

void LocationPrior::validate() const {
  if (probs.rank() != 3) throw DimensionError("location prior must be [H, W, L]");
  const std::size_t L = probs.dim(2);
  for (std::size_t j = 0; j < probs.size() / L; ++j) {
    double s = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double p = probs[j * L + l];
      // Renormalization after flooring may shrink a floored entry by at most
      // a factor 1 / (1 + L * floor).
      if (!(p >= floor / (1.0 + static_cast<double>(L) * floor) * (1.0 - 1e-12))) {
        throw ContractError("location prior entry below floor");
      }
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-6) {
      throw ContractError("location prior voxel does not sum to 1");
    }
  }
}

LocationPrior compute_location_prior(std::span<const SegmentationMap> segs,
                                     double floor) {
  if (segs.empty()) throw ContractError("location prior needs at least one map");
  const std::size_t H = segs[0].height(), W = segs[0].width(),
                    L = segs[0].num_labels();
  Grid counts({H, W, L});
  for (const SegmentationMap& s : segs) {
    if (s.height() != H || s.width() != W || s.num_labels() != L) {
      throw DimensionError("location prior maps must share one shape");
    }
    for (std::size_t j = 0; j < H * W; ++j) counts[j * L + s[j]] += 1.0;
  }
  const double n = static_cast<double>(segs.size());
  LocationPrior loc{Grid({H, W, L}), floor};
  for (std::size_t j = 0; j < H * W; ++j) {
    double total = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double p = std::max(counts[j * L + l] / n, floor);
      loc.probs[j * L + l] = p;
      total += p;
    }
    for (std::size_t l = 0; l < L; ++l) loc.probs[j * L + l] /= total;
  }
  return loc;
}

LocationPrior uniform_location_prior(std::size_t height, std::size_t width,
                                     std::size_t num_labels) {
  return LocationPrior{Grid({height, width, num_labels}, 1.0 / num_labels), 1e-7};
}

}  // namespace anatprior
