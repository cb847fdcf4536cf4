#pragma once

#include <span>

#include "anatprior/autodiff/grid.hpp"
#include "anatprior/autodiff/tape.hpp"

namespace anatprior::ad {

enum class Padding { same, valid };

// Scale of the bounded latent activation softsign_a(x) * log(2 + a|x|),
// where softsign_a(x) = x / (1 + a|x|).
struct ActivationConfig {
  double alpha = 1.0;
};

// --- layers -----------------------------------------------------------------

// input [H, W, Cin], kernels [k, k, Cin, Cout]. "same" pads (k-1)/2 zeros on
// the leading edge and produces ceil(H / stride) rows; "valid" produces
// (H - k) / stride + 1 rows.
Var conv2d(Var input, Var kernels, int stride, Padding padding = Padding::same);

// Adjoint of conv2d with "same" padding: input [h, w, Cin], kernels
// [k, k, Cout, Cin] (the kernel of the conv2d mapping Cout -> Cin), output
// [h * stride, w * stride, Cout].
Var transpose_conv2d(Var input, Var kernels, int stride);

// Flattens `input` to n values; weights [n, m], bias [m]; output [m].
Var dense(Var input, Var weights, Var bias);

// Adds bias [C] along the last axis.
Var add_channel_bias(Var input, Var bias);

// --- activations ------------------------------------------------------------

Var elu(Var x);
Var sigmoid(Var x);
Var log_sigmoid(Var x);
Var exponential(Var x);
Var bounded_latent_act(Var x, const ActivationConfig& cfg);
// Softmax over the last axis.
Var softmax_channels(Var x);

// Scalar reference implementations, shared with the Var versions.
double bounded_latent_act(double x, double alpha);
double bounded_latent_act_derivative(double x, double alpha);

// --- structural / arithmetic ------------------------------------------------

Var reshape(Var x, Shape shape);
Var add(Var a, Var b);
Var scale(Var x, double factor);
Var sum(Var x);

// Mixes a per-voxel simplex (last axis) with a uniform floor:
// (1 - C * floor) * p + floor. Keeps the simplex, bounds entries below.
Var floor_probabilities(Var p, double floor);

// --- probabilistic terms ----------------------------------------------------

// z = mean + sqrt(var) * eta.
Var reparameterize(Var mean, Var var, const Grid& eta);

// KL[N(mean, diag(var)) || N(0, I)] as a scalar.
Var kl_standard_normal(Var mean, Var var);

// -sum(target * log(p)) over all entries.
Var categorical_cross_entropy(Var p, const Grid& target);

// sum_j sum_l p[j, l] * (-log N(x[j]; mu[l], sigma[l]^2)).
// p [..., L], x with p.size() / L entries, mu [L].
Var expected_gaussian_nll(Var p, const Grid& x, Var mu,
                          std::span<const double> sigma);

// sum_j -log N(x[j]; mean[j], sigma^2).
Var gaussian_nll(Var mean, const Grid& x, double sigma);

// out[j] = sum_l p[j, l] * mu[l]; output drops the last axis of p.
Var weighted_label_sum(Var p, Var mu);

}  // namespace anatprior::ad
