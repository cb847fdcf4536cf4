#pragma once

#include "anatprior/autodiff/grid.hpp"

namespace anatprior {

// Single-channel intensity image, [H, W]; rendered images lie in [0, 1].
struct Image {
  Grid pixels;

  Image() = default;
  explicit Image(Grid g) : pixels(std::move(g)) {}
  Image(std::size_t height, std::size_t width) : pixels({height, width}) {}

  std::size_t height() const { return pixels.dim(0); }
  std::size_t width() const { return pixels.dim(1); }
  double& at(std::size_t y, std::size_t x) { return pixels[y * width() + x]; }
  double at(std::size_t y, std::size_t x) const { return pixels[y * width() + x]; }

  // [H, W, 1] view for the convolutional encoder.
  Grid as_channels() const { return pixels.reshaped({height(), width(), 1}); }

  friend bool operator==(const Image&, const Image&) = default;
};

}  // namespace anatprior
