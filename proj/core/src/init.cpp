#include "anatprior/autodiff/init.hpp"

#include <cmath>

#include "anatprior/random.hpp"

namespace anatprior::ad {

Parameter fan_in_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  Grid g(std::move(shape));
  const double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (double& v : g.values()) v = limit * (2.0 * uniform01(rng) - 1.0);
  return Parameter(std::move(g));
}

Parameter zeros(Shape shape) { return Parameter(Grid(std::move(shape))); }

}  // namespace anatprior::ad
