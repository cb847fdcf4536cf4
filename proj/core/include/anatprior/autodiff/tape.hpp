#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "anatprior/autodiff/grid.hpp"

namespace anatprior::ad {

// A trainable array together with its accumulated gradient.
struct Parameter {
  Grid value;
  Grid grad;
  bool trainable = true;

  Parameter() = default;
  explicit Parameter(Grid v, bool is_trainable = true)
      : value(std::move(v)), grad(value.shape()), trainable(is_trainable) {}

  void zero_grad() { grad.fill(0.0); }
};

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
 public:
  Var() = default;

  const Grid& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// Records forward operations in execution order; backward() replays them in
// reverse. Nodes are appended only after their inputs, so insertion order is
// a topological order.
class Tape {
 public:
  // Receives the gradient flowing into the node's output and the output
  // value itself.
  using BackwardFn =
      std::function<void(const Grid& out_grad, const Grid& out_value)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Grid value);
  Var parameter(Parameter& p);

  // Adds a node computed from `inputs`. `backward` runs only when at least
  // one input requires a gradient.
  Var record(Grid value, std::initializer_list<Var> inputs, BackwardFn backward);

  const Grid& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  // Gradient buffer of `v`, allocated on first use.
  Grid& grad(Var v);

  // Reverse sweep from a scalar loss. Accumulates into Parameter::grad of
  // every trainable parameter node reached.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

  // Number of nodes whose backward closure ran during the last sweep.
  std::size_t last_sweep_visits() const noexcept { return last_visits_; }

 private:
  struct Node {
    Grid value;
    Grid grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  Var push(Node node);
  void check_owner(Var v) const;

  std::deque<Node> nodes_;
  std::size_t last_visits_ = 0;
};

}  // namespace anatprior::ad
