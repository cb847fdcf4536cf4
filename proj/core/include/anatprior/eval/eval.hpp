#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "anatprior/prior/location_prior.hpp"
#include "anatprior/prior/segmentation.hpp"
#include "anatprior/segmenter/segmenter.hpp"
#include "anatprior/synthdata/image.hpp"

namespace anatprior {

// 2 |pred = l and truth = l| / (|pred = l| + |truth = l|); nullopt when the
// label is absent from both maps.
std::optional<double> dice(const SegmentationMap& pred, const SegmentationMap& truth,
                           std::size_t label);

struct DiceReport {
  std::vector<std::optional<double>> per_label;  // index = label id
  std::vector<std::size_t> pred_counts;
  std::vector<std::size_t> truth_counts;
  // Mean over defined non-background labels; nullopt if there are none.
  std::optional<double> mean_foreground;
};

DiceReport dice_report(const SegmentationMap& pred, const SegmentationMap& truth);

// Per-voxel argmax of the location prior, ties to the lowest label.
SegmentationMap baseline_locprior(const LocationPrior& loc);

// log sum_s p(x|s) prod_j f[j, s[j]] by enumerating all L^n maps. Refuses
// (ContractError) beyond 9 voxels or 3 labels.
double brute_force_log_marginal(const Image& x, const Grid& f,
                                const AppearanceParams& app);

struct EvalItem {
  std::string item_id;
  Image image;
  SegmentationMap truth;
  std::vector<SegmentationMap> predictions;  // one per method, in method order
};

struct EvalResults {
  std::vector<std::string> methods;
  std::vector<EvalItem> items;
};

struct ReportOptions {
  // Overlay images for the first `overlays` items; 0 disables them.
  std::size_t overlays = 16;
};

// Summary numbers, as also written to summary.txt.
struct ReportSummary {
  std::vector<double> mean_dice;  // per method; NaN if nothing defined
  std::vector<std::vector<double>> mean_label_dice;  // [method][label]
};

// Writes metrics.csv (item_id,label,dice,method), boxplot.csv (label,method,
// n,min,q1,median,q3,max,mean), overlays/<item>.ppm (image | prediction | truth,
// first method) and summary.txt.
ReportSummary emit_report(const EvalResults& results, const std::filesystem::path& out_dir,
                          const ReportOptions& options = {});

}  // namespace anatprior
