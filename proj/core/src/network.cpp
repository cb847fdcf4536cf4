#include "anatprior/prior/network.hpp"

#include <zlib.h>

#include "anatprior/autodiff/init.hpp"
#include "anatprior/errors.hpp"

namespace anatprior {

void ArchitectureConfig::validate() const {
  if (levels == 0) throw ConfigError("architecture needs at least one level");
  if (kernel % 2 == 0) throw ConfigError("kernel size must be odd");
  if (features == 0 || latent_dim == 0 || channels == 0) {
    throw ConfigError("features, latent_dim and channels must be positive");
  }
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  const std::size_t step = std::size_t{1} << levels;
  if (height % step != 0 || width % step != 0 || height < step || width < step) {
    throw ConfigError("grid " + std::to_string(height) + "x" +
                      std::to_string(width) + " is not divisible by 2^levels = " +
                      std::to_string(step));
  }
}

namespace {

auto tracked() {
  return [](ad::Tape& t, ad::Parameter& p) { return t.parameter(p); };
}
auto frozen() {
  return [](ad::Tape& t, const ad::Parameter& p) { return t.constant(p.value); };
}

}  // namespace

// --- encoder ----------------------------------------------------------------

ConvEncoder::ConvEncoder(const ArchitectureConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t k = cfg_.kernel;
  std::size_t cin = cfg_.channels;
  for (std::size_t level = 0; level < cfg_.levels; ++level) {
    kernels_.push_back(ad::fan_in_uniform({k, k, cin, cfg_.features}, k * k * cin, rng));
    biases_.push_back(ad::zeros({cfg_.features}));
    cin = cfg_.features;
  }
  const std::size_t flat = cfg_.bottom_height() * cfg_.bottom_width() * cfg_.features;
  mean_w_ = ad::fan_in_uniform({flat, cfg_.latent_dim}, flat, rng);
  mean_b_ = ad::zeros({cfg_.latent_dim});
  logvar_w_ = ad::fan_in_uniform({flat, cfg_.latent_dim}, flat, rng);
  logvar_b_ = ad::zeros({cfg_.latent_dim});
}

template <class Self, class Bind>
ConvEncoder::Output ConvEncoder::run(Self& self, ad::Tape& tape, ad::Var input,
                                     Bind bind) {
  const ArchitectureConfig& c = self.cfg_;
  if (input.shape() != Shape{c.height, c.width, c.channels}) {
    throw DimensionError("encoder expects input " +
                         shape_to_string({c.height, c.width, c.channels}) +
                         ", got " + shape_to_string(input.shape()));
  }
  ad::Var h = input;
  for (std::size_t level = 0; level < c.levels; ++level) {
    h = ad::conv2d(h, bind(tape, self.kernels_[level]), 2, ad::Padding::same);
    h = ad::elu(ad::add_channel_bias(h, bind(tape, self.biases_[level])));
  }
  const ad::ActivationConfig act{c.alpha};
  ad::Var mean = ad::bounded_latent_act(
      ad::dense(h, bind(tape, self.mean_w_), bind(tape, self.mean_b_)), act);
  ad::Var log_var = ad::bounded_latent_act(
      ad::dense(h, bind(tape, self.logvar_w_), bind(tape, self.logvar_b_)), act);
  return {mean, ad::exponential(log_var)};
}

ConvEncoder::Output ConvEncoder::forward(ad::Tape& tape, ad::Var input) {
  return run(*this, tape, input, tracked());
}

ConvEncoder::Output ConvEncoder::forward(ad::Tape& tape, ad::Var input) const {
  return run(*this, tape, input, frozen());
}

NamedParameters ConvEncoder::named_parameters() {
  NamedParameters out;
  for (std::size_t i = 0; i < kernels_.size(); ++i) {
    out.emplace_back("conv" + std::to_string(i) + ".kernel", &kernels_[i]);
    out.emplace_back("conv" + std::to_string(i) + ".bias", &biases_[i]);
  }
  out.emplace_back("mean.weight", &mean_w_);
  out.emplace_back("mean.bias", &mean_b_);
  out.emplace_back("logvar.weight", &logvar_w_);
  out.emplace_back("logvar.bias", &logvar_b_);
  return out;
}

ConstNamedParameters ConvEncoder::named_parameters() const {
  ConstNamedParameters out;
  for (auto& [name, p] : const_cast<ConvEncoder*>(this)->named_parameters()) {
    out.emplace_back(name, p);
  }
  return out;
}

std::vector<ad::Parameter*> ConvEncoder::parameters() {
  return parameter_pointers(named_parameters());
}

void ConvEncoder::set_trainable(bool trainable) {
  for (ad::Parameter* p : parameters()) p->trainable = trainable;
}

// --- decoder ----------------------------------------------------------------

ConvDecoder::ConvDecoder(const ArchitectureConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t k = cfg_.kernel;
  const std::size_t flat = cfg_.bottom_height() * cfg_.bottom_width() * cfg_.features;
  dense_w_ = ad::fan_in_uniform({cfg_.latent_dim, flat}, cfg_.latent_dim, rng);
  dense_b_ = ad::zeros({flat});
  for (std::size_t level = 0; level < cfg_.levels; ++level) {
    const bool last = level + 1 == cfg_.levels;
    const std::size_t cout = last ? cfg_.channels : cfg_.features;
    // Transpose kernels are stored [k, k, Cout, Cin].
    kernels_.push_back(
        ad::fan_in_uniform({k, k, cout, cfg_.features}, k * k * cfg_.features / 4, rng));
    biases_.push_back(ad::zeros({cout}));
  }
}

template <class Self, class Bind>
ad::Var ConvDecoder::run(Self& self, ad::Tape& tape, ad::Var z, Bind bind) {
  const ArchitectureConfig& c = self.cfg_;
  if (z.value().size() != c.latent_dim) {
    throw DimensionError("decoder expects a latent of size " +
                         std::to_string(c.latent_dim));
  }
  ad::Var h = ad::dense(z, bind(tape, self.dense_w_), bind(tape, self.dense_b_));
  h = ad::elu(ad::reshape(h, {c.bottom_height(), c.bottom_width(), c.features}));
  for (std::size_t level = 0; level < c.levels; ++level) {
    h = ad::transpose_conv2d(h, bind(tape, self.kernels_[level]), 2);
    h = ad::add_channel_bias(h, bind(tape, self.biases_[level]));
    if (level + 1 < c.levels) h = ad::elu(h);
  }
  return h;
}

ad::Var ConvDecoder::forward(ad::Tape& tape, ad::Var z) {
  return run(*this, tape, z, tracked());
}

ad::Var ConvDecoder::forward(ad::Tape& tape, ad::Var z) const {
  return run(*this, tape, z, frozen());
}

NamedParameters ConvDecoder::named_parameters() {
  NamedParameters out;
  out.emplace_back("dense.weight", &dense_w_);
  out.emplace_back("dense.bias", &dense_b_);
  for (std::size_t i = 0; i < kernels_.size(); ++i) {
    out.emplace_back("tconv" + std::to_string(i) + ".kernel", &kernels_[i]);
    out.emplace_back("tconv" + std::to_string(i) + ".bias", &biases_[i]);
  }
  return out;
}

ConstNamedParameters ConvDecoder::named_parameters() const {
  ConstNamedParameters out;
  for (auto& [name, p] : const_cast<ConvDecoder*>(this)->named_parameters()) {
    out.emplace_back(name, p);
  }
  return out;
}

std::vector<ad::Parameter*> ConvDecoder::parameters() {
  return parameter_pointers(named_parameters());
}

void ConvDecoder::set_trainable(bool trainable) {
  for (ad::Parameter* p : parameters()) p->trainable = trainable;
}

// --- helpers ----------------------------------------------------------------

std::vector<ad::Parameter*> parameter_pointers(const NamedParameters& named) {
  std::vector<ad::Parameter*> out;
  out.reserve(named.size());
  for (const auto& entry : named) out.push_back(entry.second);
  return out;
}

std::uint32_t parameter_checksum(const ConstNamedParameters& named) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::vector<float> buf;
  for (const auto& [name, p] : named) {
    buf.assign(p->value.values().begin(), p->value.values().end());
    const auto* bytes = reinterpret_cast<const Bytef*>(buf.data());
    crc = crc32(crc, bytes, static_cast<uInt>(buf.size() * sizeof(float)));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace anatprior
