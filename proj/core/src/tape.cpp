#include "anatprior/autodiff/tape.hpp"

#include <algorithm>

#include "anatprior/errors.hpp"

namespace anatprior::ad {

const Grid& Var::value() const { return tape_->value(*this); }
bool Var::requires_grad() const { return tape_->requires_grad(*this); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::check_owner(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) {
    throw ContractError("variable does not belong to this tape");
  }
}

Var Tape::constant(Grid value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(Parameter& p) {
  if (p.grad.shape() != p.value.shape()) {
    throw DimensionError("parameter gradient shape differs from its value");
  }
  Node n;
  n.value = p.value;
  n.requires_grad = p.trainable;
  n.param = &p;
  return push(std::move(n));
}

Var Tape::record(Grid value, std::initializer_list<Var> inputs,
                 BackwardFn backward) {
  bool needs = false;
  for (Var in : inputs) {
    check_owner(in);
    needs = needs || nodes_[in.id_].requires_grad;
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  return push(std::move(n));
}

Grid& Tape::grad(Var v) {
  Node& n = nodes_[v.id()];
  if (n.grad.shape() != n.value.shape()) n.grad = Grid(n.value.shape());
  return n.grad;
}

void Tape::backward(Var loss) {
  check_owner(loss);
  if (loss.value().size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        shape_to_string(loss.shape()));
  }
  last_visits_ = 0;
  if (!nodes_[loss.id_].requires_grad) return;
  grad(loss)[0] = 1.0;

  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) {
      n.backward(n.grad, n.value);
      ++last_visits_;
    }
    if (n.param != nullptr && n.param->trainable) {
      auto dst = n.param->grad.values();
      auto src = n.grad.values();
      std::transform(dst.begin(), dst.end(), src.begin(), dst.begin(),
                     std::plus<>());
    }
  }
}

}  // namespace anatprior::ad
