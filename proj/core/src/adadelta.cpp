#include "anatprior/autodiff/adadelta.hpp"

#include <cmath>

#include "anatprior/errors.hpp"

namespace anatprior::ad {

AdadeltaState::AdadeltaState(AdadeltaConfig cfg,
                             const std::vector<Parameter*>& params)
    : cfg_(cfg) {
  if (!(cfg_.rho > 0.0 && cfg_.rho < 1.0)) {
    throw ConfigError("adadelta rho must lie in (0, 1)");
  }
  if (!(cfg_.epsilon > 0.0)) throw ConfigError("adadelta epsilon must be > 0");
  if (!(cfg_.learning_rate >= 0.0)) {
    throw ConfigError("adadelta learning rate must be >= 0");
  }
  sq_grad_.reserve(params.size());
  sq_update_.reserve(params.size());
  for (const Parameter* p : params) {
    sq_grad_.emplace_back(p->value.shape());
    sq_update_.emplace_back(p->value.shape());
  }
}

void AdadeltaState::step(const std::vector<Parameter*>& params) {
  if (params.size() != sq_grad_.size()) {
    throw ContractError("adadelta: parameter list changed since construction");
  }
  const double rho = cfg_.rho, eps = cfg_.epsilon, lr = cfg_.learning_rate;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    if (p.value.shape() != sq_grad_[k].shape()) {
      throw DimensionError("adadelta: parameter shape changed");
    }
    if (!p.trainable) {
      p.zero_grad();
      continue;
    }
    Grid& eg = sq_grad_[k];
    Grid& ex = sq_update_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      eg[i] = rho * eg[i] + (1.0 - rho) * g * g;
      const double dx = -std::sqrt(ex[i] + eps) / std::sqrt(eg[i] + eps) * g;
      ex[i] = rho * ex[i] + (1.0 - rho) * dx * dx;
      p.value[i] += lr * dx;
    }
    p.zero_grad();
  }
}

}  // namespace anatprior::ad
