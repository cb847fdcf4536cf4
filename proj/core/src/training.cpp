#include "anatprior/training.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "anatprior/errors.hpp"

namespace anatprior {

void TrainingTrace::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,loss,kl," << data_term_name << ",wall_time\n";
  out.precision(10);
  for (const EpochRecord& r : epochs) {
    out << r.epoch << ',' << r.loss << ',' << r.kl << ',' << r.data_term << ','
        << r.wall_seconds << '\n';
  }
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
  }
  return idx;
}

void check_finite_terms(const char* context, double total, double kl,
                        double data_term, const char* data_term_name) {
  if (std::isfinite(total) && std::isfinite(kl) && std::isfinite(data_term)) return;
  std::ostringstream msg;
  msg << context << ": non-finite loss (total=" << total << ", kl=" << kl << ", "
      << data_term_name << "=" << data_term << ")";
  throw DivergenceError(msg.str());
}

void throw_batch_size_error() { throw ConfigError("batch size must be positive"); }

}  // namespace anatprior
