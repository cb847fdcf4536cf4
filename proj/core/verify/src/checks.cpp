#include "anatprior/verify/checks.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "anatprior/autodiff/ops.hpp"
#include "anatprior/errors.hpp"
#include "anatprior/eval/eval.hpp"
#include "anatprior/prior/gaussian.hpp"
#include "anatprior/prior/prior_model.hpp"
#include "anatprior/segmenter/noise.hpp"
#include "anatprior/segmenter/segmenter.hpp"
#include "anatprior/synthdata/anatomy.hpp"

namespace anatprior::verify {

std::string format_result(const CheckResult& r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, " value=%.6g threshold=%.6g", r.value, r.threshold);
  std::string line = (r.passed ? "PASS " : "FAIL ") + r.name + buf;
  if (!r.detail.empty()) line += " " + r.detail;
  return line;
}

ad::Var project(ad::Var x, const Grid& weights) {
  if (x.value().size() != weights.size()) throw DimensionError("project: size mismatch");
  const double v = dot(x.value(), weights);
  ad::Tape& t = x.tape();
  return t.record(Grid::scalar(v), {x}, [&t, x, weights](const Grid& g, const Grid&) {
    Grid& gx = t.grad(x);
    for (std::size_t i = 0; i < weights.size(); ++i) gx[i] += g[0] * weights[i];
  });
}

double gradient_relative_error(const std::vector<ad::Parameter*>& params,
                               const Objective& objective, double h) {
  for (ad::Parameter* p : params) p->zero_grad();
  {
    ad::Tape tape;
    tape.backward(objective(tape));
  }
  auto evaluate = [&] {
    ad::Tape tape;
    return objective(tape).value()[0];
  };
  double worst = 0.0;
  for (ad::Parameter* p : params) {
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = evaluate();
      p->value[i] = saved - h;
      const double down = evaluate();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad[i];
      diff2 += (analytic - numeric) * (analytic - numeric);
      a2 += analytic * analytic;
      n2 += numeric * numeric;
    }
    const double scale = std::sqrt(std::max(a2, n2));
    if (scale < 1e-12) continue;
    worst = std::max(worst, std::sqrt(diff2) / scale);
  }
  for (ad::Parameter* p : params) p->zero_grad();
  return worst;
}

namespace {

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

Grid normal_grid(Shape shape, Rng& rng, double scale = 1.0) {
  Grid g(std::move(shape));
  for (double& v : g.values()) v = scale * standard_normal(rng);
  return g;
}

Grid uniform_grid(Shape shape, Rng& rng, double lo, double hi) {
  Grid g(std::move(shape));
  for (double& v : g.values()) v = lo + (hi - lo) * uniform01(rng);
  return g;
}

// Random per-voxel simplex along the last axis.
Grid simplex_grid(Shape shape, Rng& rng) {
  Grid g = uniform_grid(std::move(shape), rng, 0.05, 1.0);
  const std::size_t L = g.shape().back();
  for (std::size_t j = 0; j < g.size() / L; ++j) {
    double s = 0.0;
    for (std::size_t l = 0; l < L; ++l) s += g[j * L + l];
    for (std::size_t l = 0; l < L; ++l) g[j * L + l] /= s;
  }
  return g;
}

// Parameters built from `inputs`; the objective projects op(vars) onto
// fixed random weights.
using OpFn = std::function<ad::Var(const std::vector<ad::Var>&)>;

double op_error(std::vector<Grid> inputs, const OpFn& op, Rng& rng) {
  std::vector<ad::Parameter> params;
  for (Grid& g : inputs) params.emplace_back(std::move(g));
  std::vector<ad::Parameter*> ptrs;
  for (ad::Parameter& p : params) ptrs.push_back(&p);
  Grid weights;
  {
    ad::Tape probe;
    std::vector<ad::Var> vars;
    for (ad::Parameter& p : params) vars.push_back(probe.constant(p.value));
    weights = normal_grid(op(vars).shape(), rng);
  }
  return gradient_relative_error(ptrs, [&](ad::Tape& t) {
    std::vector<ad::Var> vars;
    for (ad::Parameter& p : params) vars.push_back(t.parameter(p));
    return project(op(vars), weights);
  });
}

struct OpCase {
  std::string name;
  std::function<double(Rng&)> run;  // one random instance, returns its error
};

LocationPrior random_location(std::size_t H, std::size_t W, std::size_t L, Rng& rng) {
  return LocationPrior{simplex_grid({H, W, L}, rng), 1e-7};
}

ArchitectureConfig tiny_arch(std::size_t channels, Rng& rng) {
  ArchitectureConfig a;
  a.levels = pick(rng, 1, 2);
  a.height = a.width = std::size_t{4} << (a.levels - 1);
  a.channels = channels;
  a.features = pick(rng, 2, 3);
  a.latent_dim = pick(rng, 2, 4);
  a.alpha = 0.5 + uniform01(rng);
  return a;
}

SegmenterModel tiny_segmenter(Rng& rng, Image& x) {
  const std::size_t L = pick(rng, 2, 3);
  ArchitectureConfig arch = tiny_arch(L, rng);
  PriorModel prior =
      make_prior_model(arch, 1e-7, random_location(arch.height, arch.width, L, rng), rng);
  std::vector<double> sigma(L);
  for (double& s : sigma) s = 0.2 + 0.3 * uniform01(rng);
  SegmenterModel m = make_segmenter(prior, sigma, rng);
  for (std::size_t l = 0; l < L; ++l) m.appearance.mu.value[l] = uniform01(rng);
  x = Image(uniform_grid({arch.height, arch.width}, rng, 0.0, 1.0));
  return m;
}

std::vector<OpCase> op_cases() {
  std::vector<OpCase> cases;
  auto conv_case = [](int stride, ad::Padding pad) {
    return [stride, pad](Rng& rng) {
      const std::size_t k = 2 * pick(rng, 0, 2) + 1;
      const std::size_t H = pick(rng, k, k + 4), W = pick(rng, k, k + 4);
      const std::size_t ci = pick(rng, 1, 3), co = pick(rng, 1, 3);
      return op_error({normal_grid({H, W, ci}, rng), normal_grid({k, k, ci, co}, rng)},
                      [=](const auto& v) { return ad::conv2d(v[0], v[1], stride, pad); },
                      rng);
    };
  };
  cases.push_back({"conv2d_same_s1", conv_case(1, ad::Padding::same)});
  cases.push_back({"conv2d_same_s2", conv_case(2, ad::Padding::same)});
  cases.push_back({"conv2d_valid_s1", conv_case(1, ad::Padding::valid)});
  cases.push_back({"conv2d_valid_s2", conv_case(2, ad::Padding::valid)});
  auto tconv_case = [](int stride) {
    return [stride](Rng& rng) {
      const std::size_t k = 2 * pick(rng, 0, 2) + 1;
      const std::size_t h = pick(rng, 1, 4), w = pick(rng, 1, 4);
      const std::size_t ci = pick(rng, 1, 3), co = pick(rng, 1, 3);
      return op_error({normal_grid({h, w, ci}, rng), normal_grid({k, k, co, ci}, rng)},
                      [=](const auto& v) { return ad::transpose_conv2d(v[0], v[1], stride); },
                      rng);
    };
  };
  cases.push_back({"transpose_conv2d_s1", tconv_case(1)});
  cases.push_back({"transpose_conv2d_s2", tconv_case(2)});
  cases.push_back({"dense", [](Rng& rng) {
    const std::size_t a = pick(rng, 1, 3), b = pick(rng, 1, 3), m = pick(rng, 1, 5);
    return op_error({normal_grid({a, b}, rng), normal_grid({a * b, m}, rng),
                     normal_grid({m}, rng)},
                    [](const auto& v) { return ad::dense(v[0], v[1], v[2]); }, rng);
  }});
  cases.push_back({"add_channel_bias", [](Rng& rng) {
    const std::size_t c = pick(rng, 1, 4);
    return op_error({normal_grid({pick(rng, 1, 4), pick(rng, 1, 4), c}, rng),
                     normal_grid({c}, rng)},
                    [](const auto& v) { return ad::add_channel_bias(v[0], v[1]); }, rng);
  }});
  auto unary_case = [](std::function<ad::Var(ad::Var)> f, double scale) {
    return [f, scale](Rng& rng) {
      return op_error({normal_grid({pick(rng, 1, 4), pick(rng, 1, 4), pick(rng, 1, 3)}, rng,
                                   scale)},
                      [f](const auto& v) { return f(v[0]); }, rng);
    };
  };
  cases.push_back({"elu", unary_case([](ad::Var x) { return ad::elu(x); }, 2.0)});
  cases.push_back({"sigmoid", unary_case([](ad::Var x) { return ad::sigmoid(x); }, 3.0)});
  cases.push_back(
      {"log_sigmoid", unary_case([](ad::Var x) { return ad::log_sigmoid(x); }, 3.0)});
  cases.push_back(
      {"exponential", unary_case([](ad::Var x) { return ad::exponential(x); }, 1.0)});
  cases.push_back({"bounded_latent_act", [](Rng& rng) {
    const double alpha = 0.25 + 2.0 * uniform01(rng);
    return op_error({normal_grid({pick(rng, 1, 12)}, rng, 3.0)},
                    [alpha](const auto& v) {
                      return ad::bounded_latent_act(v[0], ad::ActivationConfig{alpha});
                    },
                    rng);
  }});
  cases.push_back({"softmax_channels",
                   unary_case([](ad::Var x) { return ad::softmax_channels(x); }, 2.0)});
  cases.push_back({"reshape", [](Rng& rng) {
    const std::size_t a = pick(rng, 1, 4), b = pick(rng, 1, 4);
    return op_error({normal_grid({a, b}, rng)},
                    [=](const auto& v) { return ad::reshape(v[0], {b, a, 1}); }, rng);
  }});
  cases.push_back({"add", [](Rng& rng) {
    const Shape s{pick(rng, 1, 4), pick(rng, 1, 4)};
    return op_error({normal_grid(s, rng), normal_grid(s, rng)},
                    [](const auto& v) { return ad::add(v[0], v[1]); }, rng);
  }});
  cases.push_back({"scale", [](Rng& rng) {
    const double f = standard_normal(rng);
    return op_error({normal_grid({pick(rng, 1, 6)}, rng)},
                    [f](const auto& v) { return ad::scale(v[0], f); }, rng);
  }});
  cases.push_back({"sum", [](Rng& rng) {
    return op_error({normal_grid({pick(rng, 1, 4), pick(rng, 1, 4)}, rng)},
                    [](const auto& v) { return ad::sum(v[0]); }, rng);
  }});
  cases.push_back({"floor_probabilities", [](Rng& rng) {
    const double fl = 1e-3 * uniform01(rng);
    return op_error({simplex_grid({pick(rng, 1, 4), pick(rng, 1, 4), pick(rng, 2, 4)}, rng)},
                    [fl](const auto& v) { return ad::floor_probabilities(v[0], fl); }, rng);
  }});
  cases.push_back({"reparameterize", [](Rng& rng) {
    const std::size_t d = pick(rng, 1, 8);
    const Grid eta = normal_grid({d}, rng);
    return op_error({normal_grid({d}, rng), uniform_grid({d}, rng, 0.2, 2.0)},
                    [eta](const auto& v) { return ad::reparameterize(v[0], v[1], eta); },
                    rng);
  }});
  cases.push_back({"kl_standard_normal", [](Rng& rng) {
    const std::size_t d = pick(rng, 1, 8);
    return op_error({normal_grid({d}, rng), uniform_grid({d}, rng, 0.2, 2.0)},
                    [](const auto& v) { return ad::kl_standard_normal(v[0], v[1]); }, rng);
  }});
  cases.push_back({"categorical_cross_entropy", [](Rng& rng) {
    const std::size_t L = pick(rng, 2, 4);
    const Shape s{pick(rng, 1, 4), pick(rng, 1, 4), L};
    const Grid target = SegmentationMap::argmax(simplex_grid(s, rng)).one_hot();
    return op_error({simplex_grid(s, rng)},
                    [target](const auto& v) {
                      return ad::categorical_cross_entropy(v[0], target);
                    },
                    rng);
  }});
  cases.push_back({"expected_gaussian_nll", [](Rng& rng) {
    const std::size_t L = pick(rng, 2, 4), H = pick(rng, 1, 4), W = pick(rng, 1, 4);
    const Grid x = uniform_grid({H, W}, rng, 0.0, 1.0);
    std::vector<double> sigma(L);
    for (double& s : sigma) s = 0.1 + 0.4 * uniform01(rng);
    return op_error({simplex_grid({H, W, L}, rng), uniform_grid({L}, rng, 0.0, 1.0)},
                    [x, sigma](const auto& v) {
                      return ad::expected_gaussian_nll(v[0], x, v[1], sigma);
                    },
                    rng);
  }});
  cases.push_back({"gaussian_nll", [](Rng& rng) {
    const Shape s{pick(rng, 1, 4), pick(rng, 1, 4)};
    const Grid x = uniform_grid(s, rng, 0.0, 1.0);
    const double sigma = 0.1 + 0.4 * uniform01(rng);
    return op_error({uniform_grid(s, rng, 0.0, 1.0)},
                    [x, sigma](const auto& v) { return ad::gaussian_nll(v[0], x, sigma); },
                    rng);
  }});
  cases.push_back({"weighted_label_sum", [](Rng& rng) {
    const std::size_t L = pick(rng, 2, 4);
    return op_error({simplex_grid({pick(rng, 1, 4), pick(rng, 1, 4), L}, rng),
                     normal_grid({L}, rng)},
                    [](const auto& v) { return ad::weighted_label_sum(v[0], v[1]); }, rng);
  }});
  cases.push_back({"segmentation_head", [](Rng& rng) {
    const std::size_t L = pick(rng, 2, 4), H = pick(rng, 1, 4), W = pick(rng, 1, 4);
    const Grid log_loc = random_location(H, W, L, rng).log_probs();
    return op_error({normal_grid({H, W, L}, rng, 2.0)},
                    [log_loc](const auto& v) {
                      return segmentation_head(v[0], log_loc, 1e-4);
                    },
                    rng);
  }});

  // Composed networks and losses; gradients w.r.t. every trainable weight.
  cases.push_back({"encoder", [](Rng& rng) {
    ArchitectureConfig arch = tiny_arch(pick(rng, 1, 3), rng);
    ConvEncoder enc(arch, rng);
    const Grid input = normal_grid({arch.height, arch.width, arch.channels}, rng);
    const Grid wm = normal_grid({arch.latent_dim}, rng), wv = normal_grid({arch.latent_dim}, rng);
    return gradient_relative_error(enc.parameters(), [&](ad::Tape& t) {
      auto out = enc.forward(t, t.constant(input));
      return ad::add(project(out.mean, wm), project(out.var, wv));
    });
  }});
  cases.push_back({"decoder", [](Rng& rng) {
    ArchitectureConfig arch = tiny_arch(pick(rng, 2, 3), rng);
    ConvDecoder dec(arch, rng);
    const Grid z = normal_grid({arch.latent_dim}, rng);
    const Grid w = normal_grid({arch.height, arch.width, arch.channels}, rng);
    return gradient_relative_error(dec.parameters(), [&](ad::Tape& t) {
      return project(dec.forward(t, t.constant(z)), w);
    });
  }});
  cases.push_back({"prior_loss", [](Rng& rng) {
    const std::size_t L = pick(rng, 2, 3);
    ArchitectureConfig arch = tiny_arch(L, rng);
    PriorModel m = make_prior_model(
        arch, 1e-7, random_location(arch.height, arch.width, L, rng), rng);
    const SegmentationMap s =
        SegmentationMap::argmax(simplex_grid({arch.height, arch.width, L}, rng));
    const Grid eta = normal_grid({arch.latent_dim}, rng);
    std::vector<ad::Parameter*> params = m.encoder.parameters();
    for (ad::Parameter* p : m.decoder.parameters()) params.push_back(p);
    return gradient_relative_error(
        params, [&](ad::Tape& t) { return prior_objective(t, s, m, eta).total; });
  }});
  cases.push_back({"unsupervised_loss", [](Rng& rng) {
    Image x;
    SegmenterModel m = tiny_segmenter(rng, x);
    const Grid eta = normal_grid({m.image_arch.latent_dim}, rng);
    std::vector<ad::Parameter*> params = m.encoder.parameters();
    params.push_back(&m.appearance.mu);
    return gradient_relative_error(
        params, [&](ad::Tape& t) { return unsupervised_objective(t, x, m, eta).total; });
  }});
  cases.push_back({"supervised_loss", [](Rng& rng) {
    Image x;
    SegmenterModel m = tiny_segmenter(rng, x);
    const SegmentationMap s = SegmentationMap::argmax(
        simplex_grid({m.image_arch.height, m.image_arch.width, m.num_labels()}, rng));
    const Grid eta = normal_grid({m.image_arch.latent_dim}, rng);
    std::vector<ad::Parameter*> params = m.encoder.parameters();
    params.push_back(&m.appearance.mu);
    return gradient_relative_error(
        params, [&](ad::Tape& t) { return supervised_objective(t, x, s, m, eta).total; });
  }});
  return cases;
}

}  // namespace

std::vector<CheckResult> gradient_suite(std::uint64_t seed, std::size_t instances,
                                        double tolerance) {
  std::vector<CheckResult> out;
  std::uint64_t index = 0;
  for (const OpCase& c : op_cases()) {
    Rng rng(derive_seed(seed, 1, index++));
    double worst = 0.0;
    for (std::size_t i = 0; i < instances; ++i) worst = std::max(worst, c.run(rng));
    out.push_back({"gradient." + c.name, worst < tolerance, worst, tolerance,
                   "instances=" + std::to_string(instances)});
  }
  return out;
}

CheckResult kl_monte_carlo_check(std::uint64_t seed, std::size_t posteriors,
                                 std::size_t samples, double tolerance) {
  Rng rng(seed);
  double worst = 0.0;
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < posteriors; ++i) {
    const std::size_t d = pick(rng, 2, 8);
    GaussianPosterior post;
    for (std::size_t k = 0; k < d; ++k) {
      post.mean.push_back(standard_normal(rng));
      post.var.push_back(std::exp(-4.0 + 5.0 * uniform01(rng)));
    }
    double acc = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      double log_ratio = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double eta = standard_normal(rng);
        const double z = post.mean[k] + std::sqrt(post.var[k]) * eta;
        const double log_q = -0.5 * (eta * eta + std::log(post.var[k]) + log_2pi);
        const double log_p = -0.5 * (z * z + log_2pi);
        log_ratio += log_q - log_p;
      }
      acc += log_ratio;
    }
    const double mc = acc / static_cast<double>(samples);
    const double closed = kl_standard_normal(post);
    worst = std::max(worst, std::abs(closed - mc) / std::abs(mc));
  }
  return {"kl.monte_carlo", worst <= tolerance, worst, tolerance,
          "posteriors=" + std::to_string(posteriors) + " samples=" + std::to_string(samples)};
}

CheckResult kl_exact_check() {
  const double zero = kl_standard_normal(GaussianPosterior{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}});
  const double half = kl_standard_normal(GaussianPosterior{{1.0, 0.0}, {1.0, 1.0}});
  const double err = std::max(std::abs(zero), std::abs(half - 0.5));
  return {"kl.exact", zero == 0.0 && half == 0.5, err, 0.0,
          "kl(0,1)=" + std::to_string(zero) + " kl((1,0),(1,1))=" + std::to_string(half)};
}

CheckResult jensen_check(std::uint64_t seed, std::size_t instances, std::size_t height,
                         std::size_t width, std::size_t labels) {
  Rng rng(seed);
  std::size_t violations = 0;
  double worst_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instances; ++i) {
    const Grid f = simplex_grid({height, width, labels}, rng);
    const Image x(uniform_grid({height, width}, rng, 0.0, 1.0));
    std::vector<double> mu(labels), sigma(labels);
    for (std::size_t l = 0; l < labels; ++l) {
      mu[l] = uniform01(rng);
      sigma[l] = 0.05 + 0.45 * uniform01(rng);
    }
    const AppearanceParams app(mu, sigma);
    ad::Tape tape;
    const double bound =
        -ad::expected_gaussian_nll(tape.constant(f), x.pixels, tape.constant(app.mu.value),
                                   app.sigma)
             .value()[0];
    const double exact = brute_force_log_marginal(x, f, app);
    const double gap = exact - bound;
    if (!(gap >= 0.0)) ++violations;
    worst_gap = std::min(worst_gap, gap);
  }
  return {"jensen." + std::to_string(height) + "x" + std::to_string(width) + "_L" +
              std::to_string(labels),
          violations == 0, static_cast<double>(violations), 0.0,
          "instances=" + std::to_string(instances) + " min_gap=" + std::to_string(worst_gap)};
}

CheckResult noise_check(std::uint64_t seed, double sigma, std::size_t images,
                        double tolerance) {
  const AnatomyConfig anatomy = AnatomyConfig::desk_default().scaled(4.0);
  ModalityConfig modality = ModalityConfig::modality_a();
  modality.sigma = sigma;
  double acc = 0.0;
  for (std::size_t i = 0; i < images; ++i) {
    Rng rng(derive_seed(seed, 2, i));
    const SegmentationMap s = generate_anatomy(anatomy, rng);
    acc += estimate_noise_sigma(render_modality(s, modality, rng));
  }
  const double mean = acc / static_cast<double>(images);
  const double rel = std::abs(mean - sigma) / sigma;
  char buf[64];
  std::snprintf(buf, sizeof buf, "sigma=%.3g mean_estimate=%.5g", sigma, mean);
  return {"noise.sigma_" + std::to_string(sigma).substr(0, 4), rel <= tolerance, rel,
          tolerance, buf};
}

CheckResult adjoint_check(std::uint64_t seed, std::size_t instances, double tolerance) {
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    const int stride = static_cast<int>(pick(rng, 1, 2));
    const std::size_t k = 2 * pick(rng, 0, 2) + 1;
    const std::size_t h = pick(rng, 1, 4), w = pick(rng, 1, 4);
    const std::size_t H = h * stride, W = w * stride;
    const std::size_t a = pick(rng, 1, 3), b = pick(rng, 1, 3);
    const Grid u = normal_grid({H, W, a}, rng), v = normal_grid({h, w, b}, rng);
    const Grid kern = normal_grid({k, k, a, b}, rng);
    ad::Tape t;
    const double lhs =
        dot(ad::conv2d(t.constant(u), t.constant(kern), stride, ad::Padding::same).value(), v);
    const double rhs = dot(u, ad::transpose_conv2d(t.constant(v), t.constant(kern), stride).value());
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }
  return {"adjoint.conv2d_transpose", worst < tolerance, worst, tolerance,
          "instances=" + std::to_string(instances)};
}

}  // namespace anatprior::verify
