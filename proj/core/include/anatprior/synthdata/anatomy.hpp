#pragma once

#include <vector>

#include "anatprior/prior/segmentation.hpp"
#include "anatprior/random.hpp"
#include "anatprior/synthdata/image.hpp"

namespace anatprior {

// One foreground structure: an ellipse, turned into a blob by a random
// boundary warp r(t) * (1 + a2 cos(2t + p2) + a3 cos(3t + p3)), |a_k| <= warp.
struct StructureSpec {
  double center_y = 0.0;
  double center_x = 0.0;
  double radius_y = 1.0;
  double radius_x = 1.0;
  double center_jitter = 0.0;    // uniform offset in [-j, j] voxels per axis
  double radius_jitter = 0.0;    // radii scaled by uniform [1 - j, 1 + j]
  double warp = 0.0;
  double rotation_jitter = 0.0;  // radians
};

// Label l (1-based) is painted by structures[l - 1] in order, so later
// structures overwrite earlier ones. Label 0 is background.
struct AnatomyConfig {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t num_labels = 4;
  double global_shift = 0.0;  // shared offset in [-g, g] per axis
  std::vector<StructureSpec> structures;
  std::size_t min_voxels = 4;
  std::size_t max_retries = 32;

  // 32 x 32, background + three nested structures.
  static AnatomyConfig desk_default();
  // Same layout on a grid `factor` times larger in each direction.
  AnatomyConfig scaled(double factor) const;

  // Throws ConfigError unless every structure stays inside the grid at the
  // maximum jitter.
  void validate() const;
};

// A jittered anatomy. Retries when a structure falls below min_voxels.
SegmentationMap generate_anatomy(const AnatomyConfig& cfg, Rng& rng);

// Appearance of each label in one imaging modality.
struct ModalityConfig {
  std::vector<double> means;
  double sigma = 0.05;
  double bias_amplitude = 0.0;

  static ModalityConfig modality_a();
  // Permuted, compressed contrasts and higher noise than modality_a.
  static ModalityConfig modality_b();

  void validate(std::size_t num_labels) const;
};

// x[j] = mu_{s[j]} + bias(j) + N(0, sigma^2), clipped to [0, 1].
Image render_modality(const SegmentationMap& s, const ModalityConfig& m, Rng& rng);

}  // namespace anatprior
