#pragma once

#include <vector>

#include "anatprior/autodiff/tape.hpp"

namespace anatprior::ad {

struct AdadeltaConfig {
  double rho = 0.95;
  double epsilon = 1e-6;
  // Multiplier on the Adadelta update; 1 is the plain rule, 0 freezes the
  // parameters while the accumulators keep decaying.
  double learning_rate = 1.0;
};

// Running averages E[g^2] and E[dx^2] for each parameter, in the order the
// parameters were registered.
class AdadeltaState {
 public:
  AdadeltaState(AdadeltaConfig cfg, const std::vector<Parameter*>& params);

  const AdadeltaConfig& config() const noexcept { return cfg_; }
  const std::vector<Grid>& squared_gradients() const noexcept { return sq_grad_; }
  const std::vector<Grid>& squared_updates() const noexcept { return sq_update_; }

  // One update of every registered trainable parameter from its gradient;
  // gradients are zeroed afterwards.
  void step(const std::vector<Parameter*>& params);

 private:
  AdadeltaConfig cfg_;
  std::vector<Grid> sq_grad_;
  std::vector<Grid> sq_update_;
};

}  // namespace anatprior::ad
