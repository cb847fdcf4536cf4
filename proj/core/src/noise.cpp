#include "anatprior/segmenter/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "anatprior/errors.hpp"

namespace anatprior {

double estimate_noise_sigma(const Image& x) {
  const std::size_t H = x.height(), W = x.width();
  if (H < 3 || W < 3) throw DimensionError("noise estimate needs at least 3x3 voxels");
  static constexpr double mask[3][3] = {{1, -2, 1}, {-2, 4, -2}, {1, -2, 1}};
  double acc = 0.0;
  for (std::size_t y = 1; y + 1 < H; ++y) {
    for (std::size_t xx = 1; xx + 1 < W; ++xx) {
      double r = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          r += mask[dy + 1][dx + 1] * x.at(y + dy, xx + dx);
        }
      }
      acc += std::abs(r);
    }
  }
  const double n = 6.0 * static_cast<double>(H - 2) * static_cast<double>(W - 2);
  return std::sqrt(std::numbers::pi / 2.0) * acc / n;
}

double estimate_noise_sigma(std::span<const Image> images) {
  if (images.empty()) throw ContractError("noise estimate needs at least one image");
  std::vector<double> est;
  est.reserve(images.size());
  for (const Image& im : images) est.push_back(estimate_noise_sigma(im));
  std::sort(est.begin(), est.end());
  const std::size_t m = est.size() / 2;
  return est.size() % 2 == 1 ? est[m] : 0.5 * (est[m - 1] + est[m]);
}

}  // namespace anatprior
