#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "anatprior/autodiff/adadelta.hpp"
#include "anatprior/autodiff/tape.hpp"
#include "anatprior/random.hpp"

namespace anatprior {

// Per-epoch means over the data seen in that epoch.
struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double kl = 0.0;
  double data_term = 0.0;
  double wall_seconds = 0.0;
};

struct TrainingTrace {
  // Column header of data_term in the CSV ("cross_entropy", "intensity", ...).
  std::string data_term_name = "data";
  std::vector<EpochRecord> epochs;

  // epoch,loss,kl,<data_term_name>,wall_time
  void write_csv(const std::filesystem::path& path) const;
};

struct TrainingConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  ad::AdadeltaConfig optimizer;
  std::function<void(const EpochRecord&)> on_epoch;
};

// Scalar training objective on a tape: total = kl + data.
struct ObjectiveTerms {
  ad::Var kl;
  ad::Var data;
  ad::Var total;
};

// Fisher-Yates permutation of [0, n) driven by uniform01.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

[[noreturn]] void throw_batch_size_error();

// Throws DivergenceError naming each term when any is non-finite.
void check_finite_terms(const char* context, double total, double kl,
                        double data_term, const char* data_term_name);

// Mini-batch epochs over n data. `step(i, inv_batch)` evaluates datum i,
// back-propagates its objective scaled by inv_batch and returns
// {kl, data_term}; the optimizer steps once per batch.
template <class Step>
TrainingTrace run_epochs(std::size_t n, const TrainingConfig& cfg,
                         const std::vector<ad::Parameter*>& params,
                         std::string data_term_name, Rng& rng, Step step) {
  if (cfg.batch_size == 0) throw_batch_size_error();
  for (ad::Parameter* p : params) p->zero_grad();
  ad::AdadeltaState opt(cfg.optimizer, params);
  TrainingTrace trace;
  trace.data_term_name = std::move(data_term_name);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffled_indices(n, rng);
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - begin);
      for (std::size_t b = begin; b < end; ++b) {
        const std::pair<double, double> terms = step(order[b], inv_batch);
        rec.kl += terms.first;
        rec.data_term += terms.second;
      }
      opt.step(params);
    }
    const double dn = static_cast<double>(n);
    rec.kl /= dn;
    rec.data_term /= dn;
    rec.loss = rec.kl + rec.data_term;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    trace.epochs.push_back(rec);
    if (cfg.on_epoch) cfg.on_epoch(rec);
  }
  return trace;
}

}  // namespace anatprior
