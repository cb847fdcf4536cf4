#include "anatprior/segmenter/segmenter.hpp"

#include <cmath>
#include <numbers>

#include "anatprior/autodiff/ops.hpp"
#include "anatprior/errors.hpp"

namespace anatprior {

AppearanceParams::AppearanceParams(std::vector<double> mu_values,
                                   std::vector<double> sigma_values)
    : sigma(std::move(sigma_values)) {
  const std::size_t n = mu_values.size();
  mu = ad::Parameter(Grid({n}, std::move(mu_values)));
  validate();
}

void AppearanceParams::validate() const {
  if (mu.value.size() != sigma.size()) {
    throw DimensionError("appearance: mu and sigma need one entry per label");
  }
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ContractError("appearance: sigma must be positive and finite");
    }
  }
  if (!mu.value.all_finite()) throw ContractError("appearance: non-finite mu");
}

std::vector<double> evenly_spaced_means(std::size_t num_labels) {
  if (num_labels < 2) throw ContractError("need at least 2 labels");
  std::vector<double> mu(num_labels);
  for (std::size_t l = 0; l < num_labels; ++l) {
    mu[l] = static_cast<double>(l) / static_cast<double>(num_labels - 1);
  }
  return mu;
}

void SegmenterModel::verify_decoder() const {
  if (parameter_checksum(decoder.named_parameters()) != decoder_checksum) {
    throw ContractError("segmenter decoder differs from the prior it was built from");
  }
}

ArchitectureConfig image_architecture(const ArchitectureConfig& prior_arch) {
  ArchitectureConfig a = prior_arch;
  a.channels = 1;
  return a;
}

SegmenterModel make_segmenter(const PriorModel& prior, std::vector<double> sigma,
                              Rng& rng) {
  const std::size_t L = prior.num_labels();
  if (sigma.size() != L) throw DimensionError("need one sigma per label");
  SegmenterModel m;
  m.image_arch = image_architecture(prior.arch);
  m.prob_floor = prior.prob_floor;
  m.encoder = ConvEncoder(m.image_arch, rng);
  m.decoder = prior.decoder;
  m.decoder.set_trainable(false);
  m.location = prior.location;
  m.appearance = AppearanceParams(evenly_spaced_means(L), std::move(sigma));
  m.decoder_checksum = parameter_checksum(prior.decoder.named_parameters());
  return m;
}

namespace {

void check_image(const Image& x, const ArchitectureConfig& arch) {
  if (x.pixels.rank() != 2 || x.height() != arch.height || x.width() != arch.width) {
    throw DimensionError("image does not match the segmenter's H x W");
  }
}

void check_latent(const LatentCode& z, const SegmenterModel& m) {
  if (z.z.size() != m.image_arch.latent_dim) {
    throw DimensionError("latent code has the wrong dimension");
  }
}

}  // namespace

GaussianPosterior encode_image(const Image& x, const SegmenterModel& model) {
  check_image(x, model.image_arch);
  ad::Tape tape;
  const ConvEncoder& enc = model.encoder;
  auto out = enc.forward(tape, tape.constant(x.as_channels()));
  const auto m = out.mean.value().values();
  const auto v = out.var.value().values();
  return {std::vector<double>(m.begin(), m.end()), std::vector<double>(v.begin(), v.end())};
}

Grid reconstruct_intensity(const Grid& f, const AppearanceParams& app) {
  if (f.rank() != 3 || f.dim(2) != app.num_labels()) {
    throw DimensionError("reconstruct_intensity: f must be [H, W, L]");
  }
  const std::size_t L = f.dim(2), n = f.size() / L;
  Grid out({f.dim(0), f.dim(1)});
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t l = 0; l < L; ++l) acc += f[j * L + l] * app.mu.value[l];
    out[j] = acc;
  }
  return out;
}

Grid decode_segmenter(const LatentCode& z, const SegmenterModel& model) {
  check_latent(z, model);
  return decode_latent(z, model.decoder, model.location, model.prob_floor);
}

UnsupervisedLossTerms expected_intensity_terms(const Image& x, const Grid& f,
                                               const AppearanceParams& app) {
  const std::size_t L = app.num_labels();
  if (f.rank() != 3 || f.dim(2) != L || f.dim(0) != x.height() || f.dim(1) != x.width()) {
    throw DimensionError("expected_intensity_terms: f must be [H, W, L] over x");
  }
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  UnsupervisedLossTerms t;
  const std::size_t n = x.pixels.size();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < L; ++l) {
      const double r = x.pixels[j] - app.mu.value[l];
      const double s = app.sigma[l];
      t.intensity += f[j * L + l] * r * r / (2.0 * s * s);
      t.log_normalizer += f[j * L + l] * (std::log(s) + half_log_2pi);
    }
  }
  t.total = t.intensity + t.log_normalizer;
  return t;
}

SupervisedLossTerms supervised_loss(const Image& x, const SegmentationMap& s,
                                    const LatentCode& z, const SegmenterModel& model) {
  check_image(x, model.image_arch);
  if (s.height() != x.height() || s.width() != x.width() ||
      s.num_labels() != model.num_labels()) {
    throw DimensionError("supervised_loss: segmentation does not match the image");
  }
  SupervisedLossTerms t;
  t.kl = kl_standard_normal(encode_image(x, model));
  const Grid f = decode_segmenter(z, model);
  const Grid target = s.one_hot();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (target[i] != 0.0) t.cross_entropy -= std::log(f[i]);
  }
  t.intensity = expected_intensity_terms(x, target, model.appearance).intensity;
  t.total = t.kl + t.cross_entropy + t.intensity;
  if (!std::isfinite(t.total)) {
    throw DivergenceError("supervised_loss non-finite: kl=" + std::to_string(t.kl) +
                          " cross_entropy=" + std::to_string(t.cross_entropy) +
                          " intensity=" + std::to_string(t.intensity));
  }
  return t;
}

UnsupervisedLossTerms unsupervised_loss(const Image& x, const LatentCode& z,
                                        const SegmenterModel& model) {
  check_image(x, model.image_arch);
  const double kl = kl_standard_normal(encode_image(x, model));
  UnsupervisedLossTerms t =
      expected_intensity_terms(x, decode_segmenter(z, model), model.appearance);
  t.kl = kl;
  t.total += kl;
  if (!std::isfinite(t.total)) {
    throw DivergenceError("unsupervised_loss non-finite: kl=" + std::to_string(t.kl) +
                          " intensity=" + std::to_string(t.intensity) +
                          " log_normalizer=" + std::to_string(t.log_normalizer));
  }
  return t;
}

namespace {

struct EncodedLatent {
  ad::Var mean, var, z, f;
};

EncodedLatent encode_decode(ad::Tape& tape, const Image& x, SegmenterModel& model,
                            const Grid& eta) {
  check_image(x, model.image_arch);
  if (eta.size() != model.image_arch.latent_dim) {
    throw DimensionError("latent noise has the wrong dimension");
  }
  auto post = model.encoder.forward(tape, tape.constant(x.as_channels()));
  ad::Var z = ad::reparameterize(post.mean, post.var, eta);
  const ConvDecoder& decoder = model.decoder;
  ad::Var f = decode_probabilities(z, decoder, model.location, model.prob_floor);
  return {post.mean, post.var, z, f};
}

}  // namespace

ObjectiveTerms unsupervised_objective(ad::Tape& tape, const Image& x,
                                      SegmenterModel& model, const Grid& eta) {
  const EncodedLatent e = encode_decode(tape, x, model, eta);
  ad::Var mu = tape.parameter(model.appearance.mu);
  ad::Var kl = ad::kl_standard_normal(e.mean, e.var);
  ad::Var nll = ad::expected_gaussian_nll(e.f, x.pixels, mu, model.appearance.sigma);
  return {kl, nll, ad::add(kl, nll)};
}

ObjectiveTerms supervised_objective(ad::Tape& tape, const Image& x,
                                    const SegmentationMap& s, SegmenterModel& model,
                                    const Grid& eta) {
  if (s.height() != x.height() || s.width() != x.width() ||
      s.num_labels() != model.num_labels()) {
    throw DimensionError("supervised_objective: segmentation does not match the image");
  }
  const EncodedLatent e = encode_decode(tape, x, model, eta);
  const Grid target = s.one_hot();
  ad::Var mu = tape.parameter(model.appearance.mu);
  ad::Var kl = ad::kl_standard_normal(e.mean, e.var);
  ad::Var ce = ad::categorical_cross_entropy(e.f, target);
  // The one-hot expected NLL minus its (constant) log normalizer.
  const UnsupervisedLossTerms constant = expected_intensity_terms(x, target, model.appearance);
  ad::Var intensity =
      ad::add(ad::expected_gaussian_nll(tape.constant(target), x.pixels, mu,
                                        model.appearance.sigma),
              tape.constant(Grid::scalar(-constant.log_normalizer)));
  ad::Var data = ad::add(ce, intensity);
  return {kl, data, ad::add(kl, data)};
}

Checkpoint segmenter_to_checkpoint(const SegmenterModel& model) {
  Checkpoint ckpt;
  ckpt.kind = "segmenter";
  put_architecture(ckpt, "arch.", model.image_arch);
  ckpt.config["num_labels"] = std::to_string(model.num_labels());
  ckpt.config["prob_floor"] = format_double(model.prob_floor);
  ckpt.config["decoder_checksum"] = std::to_string(model.decoder_checksum);
  put_parameters(ckpt, "encoder/", model.encoder.named_parameters());
  put_parameters(ckpt, "decoder/", model.decoder.named_parameters());
  put_location_prior(ckpt, "location.", model.location);
  ckpt.tensors.emplace_back("appearance/mu", model.appearance.mu.value);
  ckpt.tensors.emplace_back(
      "appearance/sigma",
      Grid({model.appearance.sigma.size()}, model.appearance.sigma));
  return ckpt;
}

SegmenterModel segmenter_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "segmenter") {
    throw CorruptFileError("expected a segmenter checkpoint, got '" + ckpt.kind + "'");
  }
  SegmenterModel m;
  m.image_arch = get_architecture(ckpt, "arch.");
  if (m.image_arch.channels != 1) {
    throw CorruptFileError("segmenter checkpoint: image encoder must have 1 channel");
  }
  ArchitectureConfig dec_arch = m.image_arch;
  dec_arch.channels = parse_size(ckpt.value("num_labels"), "num_labels");
  m.prob_floor = parse_double(ckpt.value("prob_floor"), "prob_floor");
  Rng unused(0);
  m.encoder = ConvEncoder(m.image_arch, unused);
  m.decoder = ConvDecoder(dec_arch, unused);
  get_parameters(ckpt, "encoder/", m.encoder.named_parameters());
  get_parameters(ckpt, "decoder/", m.decoder.named_parameters());
  m.decoder.set_trainable(false);
  m.location = get_location_prior(ckpt, "location.");
  if (m.location.num_labels() != dec_arch.channels) {
    throw CorruptFileError("segmenter checkpoint: location prior label count");
  }
  const Grid& mu = ckpt.tensor("appearance/mu");
  const Grid& sigma = ckpt.tensor("appearance/sigma");
  try {
    m.appearance = AppearanceParams(
        std::vector<double>(mu.values().begin(), mu.values().end()),
        std::vector<double>(sigma.values().begin(), sigma.values().end()));
  } catch (const Error& e) {
    throw CorruptFileError(std::string("segmenter checkpoint: ") + e.what());
  }
  if (m.appearance.num_labels() != dec_arch.channels) {
    throw CorruptFileError("segmenter checkpoint: appearance label count");
  }
  m.decoder_checksum = static_cast<std::uint32_t>(
      parse_size(ckpt.value("decoder_checksum"), "decoder_checksum"));
  return m;
}

void save_segmenter(const std::filesystem::path& path, const SegmenterModel& model) {
  save_checkpoint(path, segmenter_to_checkpoint(model));
}

SegmenterModel load_segmenter(const std::filesystem::path& path) {
  return segmenter_from_checkpoint(load_checkpoint(path));
}

}  // namespace anatprior
