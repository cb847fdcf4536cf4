#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "anatprior/autodiff/grid.hpp"

namespace anatprior {

// Per-voxel label field over num_labels labels, stored as label ids in
// row-major order.
class SegmentationMap {
 public:
  SegmentationMap() = default;
  SegmentationMap(std::size_t height, std::size_t width, std::size_t num_labels,
                  std::uint8_t fill = 0);
  SegmentationMap(std::size_t height, std::size_t width, std::size_t num_labels,
                  std::vector<std::uint8_t> labels);

  // Argmax over the last axis of an [H, W, L] grid; ties go to the lowest
  // label id.
  static SegmentationMap argmax(const Grid& probs);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t num_labels() const noexcept { return num_labels_; }
  std::size_t size() const noexcept { return labels_.size(); }

  std::uint8_t operator[](std::size_t j) const noexcept { return labels_[j]; }
  std::uint8_t& operator[](std::size_t j) noexcept { return labels_[j]; }
  std::uint8_t at(std::size_t y, std::size_t x) const { return labels_[y * width_ + x]; }
  std::uint8_t& at(std::size_t y, std::size_t x) { return labels_[y * width_ + x]; }

  const std::vector<std::uint8_t>& labels() const noexcept { return labels_; }

  // [H, W, L] indicator grid.
  Grid one_hot() const;
  // [H, W] grid of label ids as reals.
  Grid label_grid() const;

  std::size_t count(std::uint8_t label) const;

  friend bool operator==(const SegmentationMap&, const SegmentationMap&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t num_labels_ = 0;
  std::vector<std::uint8_t> labels_;
};

}  // namespace anatprior
