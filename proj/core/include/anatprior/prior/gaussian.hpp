#pragma once

#include <vector>

#include "anatprior/random.hpp"

namespace anatprior {

// Diagonal Gaussian over the latent code.
struct GaussianPosterior {
  std::vector<double> mean;
  std::vector<double> var;

  std::size_t dim() const noexcept { return mean.size(); }
  // Throws ContractError unless sizes agree and every variance is positive.
  void validate() const;
};

struct LatentCode {
  std::vector<double> z;
};

// KL[q || N(0, I)] = -1/2 sum_j (1 + log var_j - mean_j^2 - var_j).
double kl_standard_normal(const GaussianPosterior& post);

// Standard-normal noise of the posterior's dimension.
std::vector<double> draw_standard_normal(std::size_t dim, Rng& rng);

// z = mean + sqrt(var) * eta with eta ~ N(0, I).
LatentCode sample_latent(const GaussianPosterior& post, Rng& rng);

}  // namespace anatprior
