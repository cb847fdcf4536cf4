#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "anatprior/autodiff/tape.hpp"
#include "anatprior/random.hpp"

namespace anatprior::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // worst observed error / statistic
  double threshold = 0.0;  // bound the value was compared against
  std::string detail;
};

// One line per result: "PASS name value=... threshold=... detail".
std::string format_result(const CheckResult& r);

// Builds the scalar objective on a fresh tape, binding `params` with
// Tape::parameter.
using Objective = std::function<ad::Var(ad::Tape&)>;

// Largest relative error ||a - n|| / max(||a||, ||n||) over the parameters,
// with `a` from the reverse sweep and `n` from central differences of step h.
// Pairs with both norms below 1e-12 count as exact.
double gradient_relative_error(const std::vector<ad::Parameter*>& params,
                               const Objective& objective, double h = 1e-5);

// sum_i x_i w_i, used to reduce an arbitrary output to a scalar.
ad::Var project(ad::Var x, const Grid& weights);

// Finite-difference checks of every differentiable operation and of the
// composed networks and losses, `instances` random cases each.
std::vector<CheckResult> gradient_suite(std::uint64_t seed, std::size_t instances = 20,
                                        double tolerance = 1e-5);

// Closed form against E_q[log q(z) - log N(z; 0, I)] from `samples` draws.
// Posteriors: d in [2, 8], mean ~ N(0, 1), log var ~ U(-4, 1).
CheckResult kl_monte_carlo_check(std::uint64_t seed, std::size_t posteriors = 20,
                                 std::size_t samples = 100000, double tolerance = 0.01);

// KL at (mean 0, var 1) is exactly 0 and at (mean (1, 0), var (1, 1)) exactly 0.5.
CheckResult kl_exact_check();

// Expected log-likelihood of the training bound against the enumerated log
// marginal on random H x W, L instances; zero violations allowed.
CheckResult jensen_check(std::uint64_t seed, std::size_t instances, std::size_t height,
                         std::size_t width, std::size_t labels);

// Mean Immerkaer estimate over `images` rendered anatomies (the default
// anatomy scaled to 128 x 128, modality A contrasts at noise `sigma`)
// relative to sigma; passes within +-tolerance.
CheckResult noise_check(std::uint64_t seed, double sigma, std::size_t images = 20,
                        double tolerance = 0.15);

// <conv2d(u), v> against <u, transpose_conv2d(v)> on random shapes.
CheckResult adjoint_check(std::uint64_t seed, std::size_t instances = 20,
                          double tolerance = 1e-10);

}  // namespace anatprior::verify
