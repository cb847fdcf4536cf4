#include "anatprior/prior/segmentation.hpp"

#include <algorithm>

#include "anatprior/errors.hpp"

namespace anatprior {

SegmentationMap::SegmentationMap(std::size_t height, std::size_t width,
                                 std::size_t num_labels, std::uint8_t fill)
    : SegmentationMap(height, width, num_labels,
                      std::vector<std::uint8_t>(height * width, fill)) {}

SegmentationMap::SegmentationMap(std::size_t height, std::size_t width,
                                 std::size_t num_labels,
                                 std::vector<std::uint8_t> labels)
    : height_(height), width_(width), num_labels_(num_labels),
      labels_(std::move(labels)) {
  if (num_labels_ < 2 || num_labels_ > 255) {
    throw ContractError("label count must be in [2, 255]");
  }
  if (labels_.size() != height_ * width_) {
    throw DimensionError("label vector does not match map size");
  }
  if (std::any_of(labels_.begin(), labels_.end(),
                  [&](std::uint8_t l) { return l >= num_labels_; })) {
    throw ContractError("label id out of range");
  }
}

SegmentationMap SegmentationMap::argmax(const Grid& probs) {
  if (probs.rank() != 3) throw DimensionError("argmax expects an [H, W, L] grid");
  const std::size_t H = probs.dim(0), W = probs.dim(1), L = probs.dim(2);
  std::vector<std::uint8_t> labels(H * W);
  for (std::size_t j = 0; j < H * W; ++j) {
    const double* p = probs.data() + j * L;
    // max_element returns the first maximum, i.e. the lowest label id.
    labels[j] = static_cast<std::uint8_t>(std::max_element(p, p + L) - p);
  }
  return SegmentationMap(H, W, L, std::move(labels));
}

Grid SegmentationMap::one_hot() const {
  Grid g({height_, width_, num_labels_});
  for (std::size_t j = 0; j < labels_.size(); ++j) {
    g[j * num_labels_ + labels_[j]] = 1.0;
  }
  return g;
}

Grid SegmentationMap::label_grid() const {
  Grid g({height_, width_});
  for (std::size_t j = 0; j < labels_.size(); ++j) g[j] = labels_[j];
  return g;
}

std::size_t SegmentationMap::count(std::uint8_t label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

}  // namespace anatprior
