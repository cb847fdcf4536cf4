#include "anatprior/inference/inference.hpp"

#include <algorithm>
#include <cmath>

#include "anatprior/errors.hpp"
#include "anatprior/prior/gaussian.hpp"

namespace anatprior {

SegmentationMap map_segment(const Image& x, const SegmenterModel& model) {
  const GaussianPosterior post = encode_image(x, model);
  return SegmentationMap::argmax(decode_segmenter(LatentCode{post.mean}, model));
}

SegmentationMap sample_categorical(const Grid& f, Rng& rng) {
  if (f.rank() != 3) throw DimensionError("sample_categorical expects [H, W, L]");
  const std::size_t L = f.dim(2), n = f.dim(0) * f.dim(1);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t l = 0;
    for (; l + 1 < L; ++l) {
      acc += f[j * L + l];
      if (u < acc) break;
    }
    labels[j] = static_cast<std::uint8_t>(l);
  }
  return SegmentationMap(f.dim(0), f.dim(1), L, std::move(labels));
}

std::vector<SegmentationMap> sample_segmentations(const Image& x,
                                                  const SegmenterModel& model,
                                                  std::size_t K, Rng& rng) {
  if (K == 0) throw ContractError("need at least one sample");
  const GaussianPosterior post = encode_image(x, model);
  std::vector<SegmentationMap> out;
  out.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Grid f = decode_segmenter(sample_latent(post, rng), model);
    out.push_back(sample_categorical(f, rng));
  }
  return out;
}

Grid marginal_probabilities(const Image& x, const SegmenterModel& model, std::size_t K,
                            Rng& rng) {
  if (K == 0) throw ContractError("need at least one sample");
  const GaussianPosterior post = encode_image(x, model);
  Grid acc;
  for (std::size_t k = 0; k < K; ++k) {
    const Grid f = decode_segmenter(sample_latent(post, rng), model);
    if (k == 0) {
      acc = f;
    } else {
      for (std::size_t i = 0; i < f.size(); ++i) acc[i] += f[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(K);
  for (double& v : acc.values()) v *= inv;
  return acc;
}

UncertaintyMap entropy_map(const Grid& probs) {
  if (probs.rank() != 3) throw DimensionError("entropy_map expects [H, W, L]");
  const std::size_t L = probs.dim(2), n = probs.dim(0) * probs.dim(1);
  const double cap = std::log(static_cast<double>(L));
  UncertaintyMap u{Grid({probs.dim(0), probs.dim(1)})};
  for (std::size_t j = 0; j < n; ++j) {
    double h = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double p = probs[j * L + l];
      if (p > 0.0) h -= p * std::log(p);
    }
    u.entropy[j] = std::clamp(h, 0.0, cap);
  }
  return u;
}

UncertaintyMap uncertainty_map(const Image& x, const SegmenterModel& model,
                               std::size_t K, Rng& rng) {
  return entropy_map(marginal_probabilities(x, model, K, rng));
}

UncertaintyMap uncertainty_at_mean(const Image& x, const SegmenterModel& model) {
  const GaussianPosterior post = encode_image(x, model);
  return entropy_map(decode_segmenter(LatentCode{post.mean}, model));
}

}  // namespace anatprior
