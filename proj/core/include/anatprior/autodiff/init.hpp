#pragma once

#include <cstddef>
#include "anatprior/random.hpp"

#include "anatprior/autodiff/tape.hpp"

namespace anatprior::ad {

// Uniform in [-sqrt(3 / fan_in), sqrt(3 / fan_in)], i.e. unit-variance
// activations for unit-variance inputs.
Parameter fan_in_uniform(Shape shape, std::size_t fan_in, Rng& rng);

Parameter zeros(Shape shape);

}  // namespace anatprior::ad
