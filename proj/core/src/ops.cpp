#include "anatprior/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "anatprior/errors.hpp"

namespace anatprior::ad {
namespace {

// Geometry of a strided convolution from a (H, W, Cin) grid to an
// (oh, ow, Cout) grid.
struct ConvGeometry {
  std::size_t H, W, Cin, oh, ow, Cout, k, stride, pad;
};

void require_rank(const Var& v, std::size_t rank, const char* what) {
  if (v.value().rank() != rank) {
    throw DimensionError(std::string(what) + " expects rank " +
                         std::to_string(rank) + ", got " +
                         shape_to_string(v.shape()));
  }
}

void require_same_shape(const Var& a, const Var& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape " +
                         shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
}

void conv_forward(const ConvGeometry& g, const double* in, const double* ker,
                  double* out) {
  for (std::size_t oy = 0; oy < g.oh; ++oy) {
    for (std::size_t ox = 0; ox < g.ow; ++ox) {
      double* o = out + (oy * g.ow + ox) * g.Cout;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                  static_cast<std::ptrdiff_t>(g.pad);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.H)) continue;
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const std::ptrdiff_t ix =
              static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
              static_cast<std::ptrdiff_t>(g.pad);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.W)) continue;
          const double* ip = in + (iy * g.W + ix) * g.Cin;
          const double* kp = ker + (ky * g.k + kx) * g.Cin * g.Cout;
          for (std::size_t ci = 0; ci < g.Cin; ++ci) {
            const double v = ip[ci];
            const double* kc = kp + ci * g.Cout;
            for (std::size_t co = 0; co < g.Cout; ++co) o[co] += v * kc[co];
          }
        }
      }
    }
  }
}

// Accumulates the adjoint of conv_forward applied to `dout` into `din`.
void conv_adjoint(const ConvGeometry& g, const double* dout, const double* ker,
                  double* din) {
  for (std::size_t oy = 0; oy < g.oh; ++oy) {
    for (std::size_t ox = 0; ox < g.ow; ++ox) {
      const double* o = dout + (oy * g.ow + ox) * g.Cout;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                  static_cast<std::ptrdiff_t>(g.pad);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.H)) continue;
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const std::ptrdiff_t ix =
              static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
              static_cast<std::ptrdiff_t>(g.pad);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.W)) continue;
          double* ip = din + (iy * g.W + ix) * g.Cin;
          const double* kp = ker + (ky * g.k + kx) * g.Cin * g.Cout;
          for (std::size_t ci = 0; ci < g.Cin; ++ci) {
            const double* kc = kp + ci * g.Cout;
            double acc = 0.0;
            for (std::size_t co = 0; co < g.Cout; ++co) acc += o[co] * kc[co];
            ip[ci] += acc;
          }
        }
      }
    }
  }
}

// Accumulates d(sum(dout * conv(in, K))) / dK into dker.
void conv_kernel_grad(const ConvGeometry& g, const double* in,
                      const double* dout, double* dker) {
  for (std::size_t oy = 0; oy < g.oh; ++oy) {
    for (std::size_t ox = 0; ox < g.ow; ++ox) {
      const double* o = dout + (oy * g.ow + ox) * g.Cout;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                  static_cast<std::ptrdiff_t>(g.pad);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.H)) continue;
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const std::ptrdiff_t ix =
              static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
              static_cast<std::ptrdiff_t>(g.pad);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.W)) continue;
          const double* ip = in + (iy * g.W + ix) * g.Cin;
          double* kp = dker + (ky * g.k + kx) * g.Cin * g.Cout;
          for (std::size_t ci = 0; ci < g.Cin; ++ci) {
            const double v = ip[ci];
            double* kc = kp + ci * g.Cout;
            for (std::size_t co = 0; co < g.Cout; ++co) kc[co] += v * o[co];
          }
        }
      }
    }
  }
}

void check_kernel(const Shape& ks, int stride) {
  if (ks.size() != 4 || ks[0] != ks[1]) {
    throw DimensionError("kernels must be [k, k, Cin, Cout], got " +
                         shape_to_string(ks));
  }
  if (ks[0] % 2 == 0) throw DimensionError("kernel size must be odd");
  if (stride < 1) throw DimensionError("stride must be >= 1");
}

// Elementwise unary op: forward f(x), backward df/dx evaluated from (x, y).
template <class F, class D>
Var unary(Var x, F f, D df) {
  const Grid& xv = x.value();
  Grid y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = f(xv[i]);
  Tape& t = x.tape();
  return t.record(std::move(y), {x}, [&t, x, df](const Grid& g, const Grid&) {
    const Grid& xv = x.value();
    Grid& gx = t.grad(x);
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += g[i] * df(xv[i]);
  });
}

}  // namespace

// --- layers -----------------------------------------------------------------

Var conv2d(Var input, Var kernels, int stride, Padding padding) {
  require_rank(input, 3, "conv2d input");
  const Shape& ks = kernels.shape();
  check_kernel(ks, stride);
  const Shape& is = input.shape();
  if (is[2] != ks[2]) {
    throw DimensionError("conv2d: input has " + std::to_string(is[2]) +
                         " channels, kernels expect " + std::to_string(ks[2]));
  }
  ConvGeometry g{is[0], is[1], is[2], 0, 0, ks[3], ks[0],
                 static_cast<std::size_t>(stride), 0};
  if (padding == Padding::same) {
    g.pad = (g.k - 1) / 2;
    g.oh = (g.H + g.stride - 1) / g.stride;
    g.ow = (g.W + g.stride - 1) / g.stride;
  } else {
    if (g.H < g.k || g.W < g.k) {
      throw DimensionError("conv2d valid: input smaller than kernel");
    }
    g.oh = (g.H - g.k) / g.stride + 1;
    g.ow = (g.W - g.k) / g.stride + 1;
  }
  Grid out({g.oh, g.ow, g.Cout});
  conv_forward(g, input.value().data(), kernels.value().data(), out.data());
  Tape& t = input.tape();
  return t.record(std::move(out), {input, kernels},
                  [&t, input, kernels, g](const Grid& dout, const Grid&) {
                    if (input.requires_grad()) {
                      conv_adjoint(g, dout.data(), kernels.value().data(),
                                   t.grad(input).data());
                    }
                    if (kernels.requires_grad()) {
                      conv_kernel_grad(g, input.value().data(), dout.data(),
                                       t.grad(kernels).data());
                    }
                  });
}

Var transpose_conv2d(Var input, Var kernels, int stride) {
  require_rank(input, 3, "transpose_conv2d input");
  const Shape& ks = kernels.shape();
  check_kernel(ks, stride);
  const Shape& is = input.shape();
  if (is[2] != ks[3]) {
    throw DimensionError("transpose_conv2d: input has " +
                         std::to_string(is[2]) + " channels, kernels expect " +
                         std::to_string(ks[3]));
  }
  const auto s = static_cast<std::size_t>(stride);
  // Geometry of the conv2d whose adjoint this is.
  ConvGeometry g{is[0] * s, is[1] * s, ks[2], is[0], is[1], ks[3], ks[0], s,
                 (ks[0] - 1) / 2};
  Grid out({g.H, g.W, g.Cin});
  conv_adjoint(g, input.value().data(), kernels.value().data(), out.data());
  Tape& t = input.tape();
  return t.record(std::move(out), {input, kernels},
                  [&t, input, kernels, g](const Grid& dout, const Grid&) {
                    if (input.requires_grad()) {
                      conv_forward(g, dout.data(), kernels.value().data(),
                                   t.grad(input).data());
                    }
                    if (kernels.requires_grad()) {
                      conv_kernel_grad(g, dout.data(), input.value().data(),
                                       t.grad(kernels).data());
                    }
                  });
}

Var dense(Var input, Var weights, Var bias) {
  const Shape& ws = weights.shape();
  if (ws.size() != 2) throw DimensionError("dense weights must be [n, m]");
  const std::size_t n = ws[0], m = ws[1];
  if (input.value().size() != n) {
    throw DimensionError("dense: input has " +
                         std::to_string(input.value().size()) +
                         " values, weights expect " + std::to_string(n));
  }
  if (bias.value().size() != m) throw DimensionError("dense: bias size mismatch");
  Grid out({m});
  const double* x = input.value().data();
  const double* w = weights.value().data();
  std::copy(bias.value().data(), bias.value().data() + m, out.data());
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double* wr = w + i * m;
    for (std::size_t j = 0; j < m; ++j) out[j] += xi * wr[j];
  }
  Tape& t = input.tape();
  return t.record(std::move(out), {input, weights, bias},
                  [&t, input, weights, bias, n, m](const Grid& g, const Grid&) {
                    const double* x = input.value().data();
                    const double* w = weights.value().data();
                    if (input.requires_grad()) {
                      double* gx = t.grad(input).data();
                      for (std::size_t i = 0; i < n; ++i) {
                        const double* wr = w + i * m;
                        double acc = 0.0;
                        for (std::size_t j = 0; j < m; ++j) acc += wr[j] * g[j];
                        gx[i] += acc;
                      }
                    }
                    if (weights.requires_grad()) {
                      double* gw = t.grad(weights).data();
                      for (std::size_t i = 0; i < n; ++i) {
                        double* gr = gw + i * m;
                        for (std::size_t j = 0; j < m; ++j) gr[j] += x[i] * g[j];
                      }
                    }
                    if (bias.requires_grad()) {
                      Grid& gb = t.grad(bias);
                      for (std::size_t j = 0; j < m; ++j) gb[j] += g[j];
                    }
                  });
}

Var add_channel_bias(Var input, Var bias) {
  const Grid& x = input.value();
  if (x.rank() == 0) throw DimensionError("add_channel_bias: empty input");
  const std::size_t C = x.shape().back();
  if (bias.value().size() != C) {
    throw DimensionError("add_channel_bias: bias size mismatch");
  }
  Grid out = x;
  const double* b = bias.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i % C];
  Tape& t = input.tape();
  return t.record(std::move(out), {input, bias},
                  [&t, input, bias, C](const Grid& g, const Grid&) {
                    if (input.requires_grad()) {
                      Grid& gx = t.grad(input);
                      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                    }
                    if (bias.requires_grad()) {
                      Grid& gb = t.grad(bias);
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i % C] += g[i];
                    }
                  });
}

// --- activations ------------------------------------------------------------

Var elu(Var x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : std::expm1(v); },
      [](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
}

namespace {
double sigmoid_scalar(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}
}  // namespace

Var sigmoid(Var x) {
  return unary(x, sigmoid_scalar, [](double v) {
    const double s = sigmoid_scalar(v);
    return s * (1.0 - s);
  });
}

Var log_sigmoid(Var x) {
  return unary(
      x,
      [](double v) {
        return v >= 0.0 ? -std::log1p(std::exp(-v)) : v - std::log1p(std::exp(v));
      },
      [](double v) { return sigmoid_scalar(-v); });
}

Var exponential(Var x) {
  return unary(x, [](double v) { return std::exp(v); },
               [](double v) { return std::exp(v); });
}

double bounded_latent_act(double x, double alpha) {
  const double a = alpha * std::abs(x);
  return x / (1.0 + a) * std::log(2.0 + a);
}

double bounded_latent_act_derivative(double x, double alpha) {
  const double a = alpha * std::abs(x);
  const double soft = 1.0 / ((1.0 + a) * (1.0 + a));
  return soft * std::log(2.0 + a) + a / ((1.0 + a) * (2.0 + a));
}

Var bounded_latent_act(Var x, const ActivationConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw ContractError("activation alpha must be > 0");
  const double alpha = cfg.alpha;
  return unary(
      x, [alpha](double v) { return bounded_latent_act(v, alpha); },
      [alpha](double v) { return bounded_latent_act_derivative(v, alpha); });
}

Var softmax_channels(Var x) {
  const Grid& xv = x.value();
  if (xv.rank() == 0 || xv.empty()) throw DimensionError("softmax: empty input");
  const std::size_t C = xv.shape().back();
  const std::size_t n = xv.size() / C;
  Grid y(xv.shape());
  for (std::size_t j = 0; j < n; ++j) {
    const double* xi = xv.data() + j * C;
    double* yi = y.data() + j * C;
    const double mx = *std::max_element(xi, xi + C);
    double z = 0.0;
    for (std::size_t c = 0; c < C; ++c) z += (yi[c] = std::exp(xi[c] - mx));
    for (std::size_t c = 0; c < C; ++c) yi[c] /= z;
  }
  Tape& t = x.tape();
  return t.record(std::move(y), {x}, [&t, x, C, n](const Grid& g, const Grid& yv) {
    Grid& gx = t.grad(x);
    for (std::size_t j = 0; j < n; ++j) {
      const double* yi = yv.data() + j * C;
      const double* gi = g.data() + j * C;
      double s = 0.0;
      for (std::size_t c = 0; c < C; ++c) s += yi[c] * gi[c];
      for (std::size_t c = 0; c < C; ++c) gx[j * C + c] += yi[c] * (gi[c] - s);
    }
  });
}

// --- structural / arithmetic ------------------------------------------------

Var reshape(Var x, Shape shape) {
  Grid y = x.value().reshaped(std::move(shape));
  Tape& t = x.tape();
  return t.record(std::move(y), {x}, [&t, x](const Grid& g, const Grid&) {
    Grid& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Grid y = a.value();
  const Grid& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  Tape& t = a.tape();
  return t.record(std::move(y), {a, b}, [&t, a, b](const Grid& g, const Grid&) {
    for (Var v : {a, b}) {
      if (!v.requires_grad()) continue;
      Grid& gv = t.grad(v);
      for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
    }
  });
}

Var scale(Var x, double factor) {
  Grid y = x.value();
  for (double& v : y.values()) v *= factor;
  Tape& t = x.tape();
  return t.record(std::move(y), {x}, [&t, x, factor](const Grid& g, const Grid&) {
    Grid& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  Tape& t = x.tape();
  return t.record(Grid::scalar(s), {x}, [&t, x](const Grid& g, const Grid&) {
    Grid& gx = t.grad(x);
    for (double& v : gx.values()) v += g[0];
  });
}

Var floor_probabilities(Var p, double floor) {
  const Grid& pv = p.value();
  const std::size_t C = pv.shape().back();
  const double keep = 1.0 - static_cast<double>(C) * floor;
  if (!(floor >= 0.0) || !(keep > 0.0)) {
    throw ContractError("probability floor must be in [0, 1/C)");
  }
  Grid y = pv;
  for (double& v : y.values()) v = keep * v + floor;
  Tape& t = p.tape();
  return t.record(std::move(y), {p}, [&t, p, keep](const Grid& g, const Grid&) {
    Grid& gp = t.grad(p);
    for (std::size_t i = 0; i < g.size(); ++i) gp[i] += keep * g[i];
  });
}

// --- probabilistic terms ----------------------------------------------------

Var reparameterize(Var mean, Var var, const Grid& eta) {
  require_same_shape(mean, var, "reparameterize");
  if (eta.size() != mean.value().size()) {
    throw DimensionError("reparameterize: noise size mismatch");
  }
  const Grid& m = mean.value();
  const Grid& v = var.value();
  Grid z(m.shape());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = m[i] + std::sqrt(v[i]) * eta[i];
  Tape& t = mean.tape();
  return t.record(std::move(z), {mean, var}, [&t, mean, var, eta](const Grid& g, const Grid&) {
    if (mean.requires_grad()) {
      Grid& gm = t.grad(mean);
      for (std::size_t i = 0; i < g.size(); ++i) gm[i] += g[i];
    }
    if (var.requires_grad()) {
      const Grid& v = var.value();
      Grid& gv = t.grad(var);
      for (std::size_t i = 0; i < g.size(); ++i) {
        gv[i] += g[i] * eta[i] / (2.0 * std::sqrt(v[i]));
      }
    }
  });
}

Var kl_standard_normal(Var mean, Var var) {
  require_same_shape(mean, var, "kl_standard_normal");
  const Grid& m = mean.value();
  const Grid& v = var.value();
  double kl = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    kl += v[i] + m[i] * m[i] - 1.0 - std::log(v[i]);
  }
  kl *= 0.5;
  Tape& t = mean.tape();
  return t.record(Grid::scalar(kl), {mean, var}, [&t, mean, var](const Grid& g, const Grid&) {
    const Grid& m = mean.value();
    const Grid& v = var.value();
    if (mean.requires_grad()) {
      Grid& gm = t.grad(mean);
      for (std::size_t i = 0; i < m.size(); ++i) gm[i] += g[0] * m[i];
    }
    if (var.requires_grad()) {
      Grid& gv = t.grad(var);
      for (std::size_t i = 0; i < v.size(); ++i) {
        gv[i] += g[0] * 0.5 * (1.0 - 1.0 / v[i]);
      }
    }
  });
}

Var categorical_cross_entropy(Var p, const Grid& target) {
  const Grid& pv = p.value();
  if (target.size() != pv.size()) {
    throw DimensionError("cross entropy: target shape " +
                         shape_to_string(target.shape()) + " vs " +
                         shape_to_string(pv.shape()));
  }
  double ce = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (target[i] != 0.0) ce -= target[i] * std::log(pv[i]);
  }
  Tape& t = p.tape();
  return t.record(Grid::scalar(ce), {p}, [&t, p, target](const Grid& g, const Grid&) {
    const Grid& pv = p.value();
    Grid& gp = t.grad(p);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      if (target[i] != 0.0) gp[i] -= g[0] * target[i] / pv[i];
    }
  });
}

Var expected_gaussian_nll(Var p, const Grid& x, Var mu,
                          std::span<const double> sigma) {
  const Grid& pv = p.value();
  const std::size_t L = pv.shape().back();
  const std::size_t n = pv.size() / L;
  if (x.size() != n) throw DimensionError("expected_gaussian_nll: image size");
  if (mu.value().size() != L || sigma.size() != L) {
    throw DimensionError("expected_gaussian_nll: label parameter count");
  }
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  std::vector<double> inv_var(L), log_norm(L);
  for (std::size_t l = 0; l < L; ++l) {
    if (!(sigma[l] > 0.0)) throw ContractError("sigma must be positive");
    inv_var[l] = 1.0 / (sigma[l] * sigma[l]);
    log_norm[l] = std::log(sigma[l]) + half_log_2pi;
  }
  const double* m = mu.value().data();
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < L; ++l) {
      const double r = x[j] - m[l];
      total += pv[j * L + l] * (0.5 * r * r * inv_var[l] + log_norm[l]);
    }
  }
  Tape& t = p.tape();
  return t.record(
      Grid::scalar(total), {p, mu},
      [&t, p, x, mu, inv_var, log_norm, L, n](const Grid& g, const Grid&) {
        const double* m = mu.value().data();
        if (p.requires_grad()) {
          Grid& gp = t.grad(p);
          for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t l = 0; l < L; ++l) {
              const double r = x[j] - m[l];
              gp[j * L + l] += g[0] * (0.5 * r * r * inv_var[l] + log_norm[l]);
            }
          }
        }
        if (mu.requires_grad()) {
          const Grid& pv = p.value();
          Grid& gm = t.grad(mu);
          for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t l = 0; l < L; ++l) {
              gm[l] += g[0] * pv[j * L + l] * (m[l] - x[j]) * inv_var[l];
            }
          }
        }
      });
}

Var gaussian_nll(Var mean, const Grid& x, double sigma) {
  const Grid& mv = mean.value();
  if (mv.size() != x.size()) throw DimensionError("gaussian_nll: size mismatch");
  if (!(sigma > 0.0)) throw ContractError("sigma must be positive");
  const double inv_var = 1.0 / (sigma * sigma);
  const double log_norm = std::log(sigma) + 0.5 * std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double r = x[j] - mv[j];
    total += 0.5 * r * r * inv_var + log_norm;
  }
  Tape& t = mean.tape();
  return t.record(Grid::scalar(total), {mean}, [&t, mean, x, inv_var](const Grid& g, const Grid&) {
    const Grid& mv = mean.value();
    Grid& gm = t.grad(mean);
    for (std::size_t j = 0; j < x.size(); ++j) {
      gm[j] += g[0] * (mv[j] - x[j]) * inv_var;
    }
  });
}

Var weighted_label_sum(Var p, Var mu) {
  const Grid& pv = p.value();
  const std::size_t L = pv.shape().back();
  if (mu.value().size() != L) throw DimensionError("weighted_label_sum: mu size");
  Shape out_shape(pv.shape().begin(), pv.shape().end() - 1);
  if (out_shape.empty()) out_shape.push_back(1);
  const std::size_t n = pv.size() / L;
  Grid out(out_shape);
  const double* m = mu.value().data();
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t l = 0; l < L; ++l) acc += pv[j * L + l] * m[l];
    out[j] = acc;
  }
  Tape& t = p.tape();
  return t.record(std::move(out), {p, mu}, [&t, p, mu, L, n](const Grid& g, const Grid&) {
    if (p.requires_grad()) {
      const double* m = mu.value().data();
      Grid& gp = t.grad(p);
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < L; ++l) gp[j * L + l] += g[j] * m[l];
      }
    }
    if (mu.requires_grad()) {
      const Grid& pv = p.value();
      Grid& gm = t.grad(mu);
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < L; ++l) gm[l] += g[j] * pv[j * L + l];
      }
    }
  });
}

}  // namespace anatprior::ad
