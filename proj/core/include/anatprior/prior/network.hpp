#pragma once

#include <string>
#include <utility>
#include <vector>

#include "anatprior/autodiff/ops.hpp"
#include "anatprior/autodiff/tape.hpp"
#include "anatprior/random.hpp"

namespace anatprior {

// Shape of one encoder (or its mirrored decoder).
struct ArchitectureConfig {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t channels = 4;  // encoder input / decoder output channels
  std::size_t levels = 4;
  std::size_t features = 32;
  std::size_t kernel = 3;
  std::size_t latent_dim = 32;
  double alpha = 1.0;

  // Spatial size at the bottleneck.
  std::size_t bottom_height() const { return height >> levels; }
  std::size_t bottom_width() const { return width >> levels; }
  void validate() const;

  friend bool operator==(const ArchitectureConfig&,
                         const ArchitectureConfig&) = default;
};

using NamedParameters = std::vector<std::pair<std::string, ad::Parameter*>>;
using ConstNamedParameters =
    std::vector<std::pair<std::string, const ad::Parameter*>>;

// levels x (stride-2 conv + bias + elu), then two dense heads for the
// posterior mean and log-variance, both through the bounded activation:
// mean = act(dense_mu(h)), var = exp(act(dense_logvar(h))).
class ConvEncoder {
 public:
  struct Output {
    ad::Var mean;
    ad::Var var;
  };

  ConvEncoder() = default;
  ConvEncoder(const ArchitectureConfig& cfg, Rng& rng);

  // Trainable parameters are tracked on the tape.
  Output forward(ad::Tape& tape, ad::Var input);
  // All parameters enter the tape as constants.
  Output forward(ad::Tape& tape, ad::Var input) const;

  const ArchitectureConfig& config() const noexcept { return cfg_; }
  NamedParameters named_parameters();
  ConstNamedParameters named_parameters() const;
  std::vector<ad::Parameter*> parameters();
  void set_trainable(bool trainable);

 private:
  template <class Self, class Bind>
  static Output run(Self& self, ad::Tape& tape, ad::Var input, Bind bind);

  ArchitectureConfig cfg_;
  std::vector<ad::Parameter> kernels_;
  std::vector<ad::Parameter> biases_;
  ad::Parameter mean_w_, mean_b_, logvar_w_, logvar_b_;
};

// Mirror of ConvEncoder: dense to the bottleneck grid + elu, then levels x
// (stride-2 transpose conv + bias), elu between levels. Returns logits of
// shape [height, width, channels].
class ConvDecoder {
 public:
  ConvDecoder() = default;
  ConvDecoder(const ArchitectureConfig& cfg, Rng& rng);

  ad::Var forward(ad::Tape& tape, ad::Var z);
  ad::Var forward(ad::Tape& tape, ad::Var z) const;

  const ArchitectureConfig& config() const noexcept { return cfg_; }
  NamedParameters named_parameters();
  ConstNamedParameters named_parameters() const;
  std::vector<ad::Parameter*> parameters();
  void set_trainable(bool trainable);

 private:
  template <class Self, class Bind>
  static ad::Var run(Self& self, ad::Tape& tape, ad::Var z, Bind bind);

  ArchitectureConfig cfg_;
  ad::Parameter dense_w_, dense_b_;
  std::vector<ad::Parameter> kernels_;
  std::vector<ad::Parameter> biases_;
};

std::vector<ad::Parameter*> parameter_pointers(const NamedParameters& named);

// CRC32 over every parameter value at checkpoint (32-bit) precision, in order.
std::uint32_t parameter_checksum(const ConstNamedParameters& named);

}  // namespace anatprior
