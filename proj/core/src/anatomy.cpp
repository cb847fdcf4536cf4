#include "anatprior/synthdata/anatomy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "anatprior/errors.hpp"

namespace anatprior {

namespace {

double uniform_in(Rng& rng, double half_width) {
  return half_width * (2.0 * uniform01(rng) - 1.0);
}

struct DrawnStructure {
  double cy, cx, ry, rx, rot;
  double a2, p2, a3, p3;
};

DrawnStructure draw(const StructureSpec& s, double gy, double gx, Rng& rng) {
  DrawnStructure d{};
  d.cy = s.center_y + gy + uniform_in(rng, s.center_jitter);
  d.cx = s.center_x + gx + uniform_in(rng, s.center_jitter);
  d.ry = s.radius_y * (1.0 + uniform_in(rng, s.radius_jitter));
  d.rx = s.radius_x * (1.0 + uniform_in(rng, s.radius_jitter));
  d.rot = uniform_in(rng, s.rotation_jitter);
  d.a2 = uniform_in(rng, s.warp);
  d.p2 = 2.0 * std::numbers::pi * uniform01(rng);
  d.a3 = uniform_in(rng, s.warp);
  d.p3 = 2.0 * std::numbers::pi * uniform01(rng);
  return d;
}

bool inside(const DrawnStructure& d, double y, double x) {
  const double dy = y - d.cy, dx = x - d.cx;
  const double c = std::cos(d.rot), s = std::sin(d.rot);
  const double u = (c * dy + s * dx) / d.ry;
  const double v = (-s * dy + c * dx) / d.rx;
  const double rho = std::hypot(u, v);
  const double t = std::atan2(v, u);
  const double bound =
      1.0 + d.a2 * std::cos(2.0 * t + d.p2) + d.a3 * std::cos(3.0 * t + d.p3);
  return rho <= bound;
}

}  // namespace

AnatomyConfig AnatomyConfig::desk_default() {
  AnatomyConfig cfg;
  cfg.height = 32;
  cfg.width = 32;
  cfg.num_labels = 4;
  cfg.global_shift = 2.0;
  // Outer tissue, then two inner structures.
  cfg.structures = {
      {15.5, 15.5, 10.0, 8.0, 1.0, 0.10, 0.05, 0.20},
      {12.5, 13.5, 4.0, 3.0, 1.5, 0.20, 0.08, 0.30},
      {18.5, 18.0, 3.5, 3.0, 1.5, 0.20, 0.08, 0.30},
  };
  return cfg;
}

AnatomyConfig AnatomyConfig::scaled(double factor) const {
  AnatomyConfig out = *this;
  out.height = static_cast<std::size_t>(std::lround(static_cast<double>(height) * factor));
  out.width = static_cast<std::size_t>(std::lround(static_cast<double>(width) * factor));
  out.global_shift *= factor;
  for (StructureSpec& s : out.structures) {
    // Voxel centres sit at integer coordinates: map [-0.5, n - 0.5] onto
    // [-0.5, factor * n - 0.5].
    s.center_y = (s.center_y + 0.5) * factor - 0.5;
    s.center_x = (s.center_x + 0.5) * factor - 0.5;
    s.radius_y *= factor;
    s.radius_x *= factor;
    s.center_jitter *= factor;
  }
  out.min_voxels = static_cast<std::size_t>(
      std::ceil(static_cast<double>(min_voxels) * factor * factor));
  return out;
}

void AnatomyConfig::validate() const {
  if (num_labels < 2) throw ConfigError("anatomy needs at least 2 labels");
  if (structures.size() != num_labels - 1) {
    throw ConfigError("anatomy needs one structure per foreground label");
  }
  if (height == 0 || width == 0) throw ConfigError("empty anatomy grid");
  for (std::size_t i = 0; i < structures.size(); ++i) {
    const StructureSpec& s = structures[i];
    if (s.radius_y <= 0.0 || s.radius_x <= 0.0 || s.radius_jitter >= 1.0 ||
        s.warp >= 0.5 || s.center_jitter < 0.0 || s.radius_jitter < 0.0 ||
        s.warp < 0.0) {
      throw ConfigError("structure " + std::to_string(i + 1) +
                        ": invalid radius, jitter or warp");
    }
    const double reach = std::max(s.radius_y, s.radius_x) * (1.0 + s.radius_jitter) *
                         (1.0 + 2.0 * s.warp);
    const double shift = global_shift + s.center_jitter;
    const bool fits = s.center_y - shift - reach >= -0.5 &&
                      s.center_y + shift + reach <= static_cast<double>(height) - 0.5 &&
                      s.center_x - shift - reach >= -0.5 &&
                      s.center_x + shift + reach <= static_cast<double>(width) - 0.5;
    if (!fits) {
      throw ConfigError("structure " + std::to_string(i + 1) +
                        " can leave the grid at maximum jitter");
    }
  }
}

SegmentationMap generate_anatomy(const AnatomyConfig& cfg, Rng& rng) {
  cfg.validate();
  for (std::size_t attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    const double gy = uniform_in(rng, cfg.global_shift);
    const double gx = uniform_in(rng, cfg.global_shift);
    SegmentationMap s(cfg.height, cfg.width, cfg.num_labels);
    for (std::size_t i = 0; i < cfg.structures.size(); ++i) {
      const DrawnStructure d = draw(cfg.structures[i], gy, gx, rng);
      const auto label = static_cast<std::uint8_t>(i + 1);
      for (std::size_t y = 0; y < cfg.height; ++y) {
        for (std::size_t x = 0; x < cfg.width; ++x) {
          if (inside(d, static_cast<double>(y), static_cast<double>(x))) {
            s.at(y, x) = label;
          }
        }
      }
    }
    bool ok = true;
    for (std::size_t l = 1; l < cfg.num_labels; ++l) {
      ok = ok && s.count(static_cast<std::uint8_t>(l)) >= cfg.min_voxels;
    }
    if (ok) return s;
  }
  throw ConfigError("anatomy generation exhausted its retries; structures degenerate");
}

ModalityConfig ModalityConfig::modality_a() {
  return ModalityConfig{{0.20, 0.50, 0.80, 0.35}, 0.05, 0.0};
}

ModalityConfig ModalityConfig::modality_b() {
  return ModalityConfig{{0.35, 0.55, 0.25, 0.70}, 0.08, 0.0};
}

void ModalityConfig::validate(std::size_t num_labels) const {
  if (means.size() != num_labels) {
    throw ConfigError("modality needs one mean per label");
  }
  if (!(sigma > 0.0)) throw ConfigError("modality noise sigma must be > 0");
  std::set<double> distinct(means.begin(), means.end());
  if (distinct.size() + 1 < num_labels) {
    throw ConfigError("modality means must be distinct for at least L - 1 labels");
  }
  for (double m : means) {
    if (m < 0.0 || m > 1.0) throw ConfigError("modality means must lie in [0, 1]");
  }
}

Image render_modality(const SegmentationMap& s, const ModalityConfig& m, Rng& rng) {
  m.validate(s.num_labels());
  const std::size_t H = s.height(), W = s.width();
  Image img(H, W);
  double py = 0.0, px = 0.0;
  if (m.bias_amplitude != 0.0) {
    py = 2.0 * std::numbers::pi * uniform01(rng);
    px = 2.0 * std::numbers::pi * uniform01(rng);
  }
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      double v = m.means[s.at(y, x)];
      if (m.bias_amplitude != 0.0) {
        v += m.bias_amplitude *
             std::cos(std::numbers::pi * static_cast<double>(y) / H + py) *
             std::cos(std::numbers::pi * static_cast<double>(x) / W + px);
      }
      v += m.sigma * standard_normal(rng);
      img.at(y, x) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace anatprior
