#include "anatprior/prior/gaussian.hpp"

#include <cmath>

#include "anatprior/errors.hpp"

namespace anatprior {

void GaussianPosterior::validate() const {
  if (mean.size() != var.size()) {
    throw ContractError("posterior mean and variance sizes differ");
  }
  for (double v : var) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ContractError("posterior variance must be positive and finite");
    }
  }
}

double kl_standard_normal(const GaussianPosterior& post) {
  post.validate();
  double kl = 0.0;
  for (std::size_t j = 0; j < post.dim(); ++j) {
    kl += post.var[j] + post.mean[j] * post.mean[j] - 1.0 - std::log(post.var[j]);
  }
  return 0.5 * kl;
}

std::vector<double> draw_standard_normal(std::size_t dim, Rng& rng) {
  std::vector<double> eta(dim);
  for (double& e : eta) e = standard_normal(rng);
  return eta;
}

LatentCode sample_latent(const GaussianPosterior& post, Rng& rng) {
  post.validate();
  LatentCode code{draw_standard_normal(post.dim(), rng)};
  for (std::size_t j = 0; j < post.dim(); ++j) {
    code.z[j] = post.mean[j] + std::sqrt(post.var[j]) * code.z[j];
  }
  return code;
}

}  // namespace anatprior
