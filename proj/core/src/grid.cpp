#include "anatprior/autodiff/grid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "anatprior/errors.hpp"

namespace anatprior {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Grid::Grid(Shape shape, double fill)
    : shape_(std::move(shape)), values_(shape_size(shape_), fill) {}

Grid::Grid(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_size(shape_) != values_.size()) {
    throw DimensionError("grid shape " + shape_to_string(shape_) + " holds " +
                         std::to_string(shape_size(shape_)) + " values, got " +
                         std::to_string(values_.size()));
  }
}

Grid Grid::reshaped(Shape shape) const {
  if (shape_size(shape) != values_.size()) {
    throw DimensionError("cannot reshape " + shape_to_string(shape_) + " to " +
                         shape_to_string(shape));
  }
  return Grid(std::move(shape), values_);
}

void Grid::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Grid::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

double dot(const Grid& a, const Grid& b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot of grids with different sizes");
  }
  return std::inner_product(a.values().begin(), a.values().end(),
                            b.values().begin(), 0.0);
}

}  // namespace anatprior
