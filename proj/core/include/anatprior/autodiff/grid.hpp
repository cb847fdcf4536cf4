#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace anatprior {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Dense row-major array of doubles with shape metadata. Spatial data is laid
// out channels-last: an H x W x C grid stores value (y, x, c) at
// (y * W + x) * C + c.
class Grid {
 public:
  Grid() = default;
  explicit Grid(Shape shape, double fill = 0.0);
  Grid(Shape shape, std::vector<double> values);

  static Grid scalar(double v) { return Grid({1}, std::vector<double>{v}); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return values_[(y * shape_[1] + x) * shape_[2] + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return values_[(y * shape_[1] + x) * shape_[2] + c];
  }

  // Same values, new shape. Throws DimensionError when sizes differ.
  Grid reshaped(Shape shape) const;

  void fill(double v);
  bool all_finite() const noexcept;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

double dot(const Grid& a, const Grid& b);

}  // namespace anatprior
