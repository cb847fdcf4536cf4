#include "anatprior/eval/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "anatprior/errors.hpp"
#include "anatprior/synthdata/volgrid.hpp"

namespace anatprior {

namespace {

void check_pair(const SegmentationMap& a, const SegmentationMap& b) {
  if (a.height() != b.height() || a.width() != b.width() ||
      a.num_labels() != b.num_labels()) {
    throw DimensionError("dice: maps differ in shape or label count");
  }
}

std::string fixed(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Linear-interpolated quantile of sorted values.
double quantile(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Distinct hues for up to 8 labels; background is left as the grey image.
constexpr std::array<std::array<std::uint8_t, 3>, 8> kPalette = {{
    {0, 0, 0}, {230, 60, 50}, {60, 180, 75}, {0, 130, 200},
    {245, 130, 48}, {145, 30, 180}, {70, 240, 240}, {240, 50, 230}}};

void blend(std::vector<std::uint8_t>& rgb, std::size_t at, double grey,
           std::size_t label) {
  const double g = std::clamp(grey, 0.0, 1.0) * 255.0;
  for (int c = 0; c < 3; ++c) {
    double v = g;
    if (label != 0) v = 0.5 * g + 0.5 * kPalette[label % kPalette.size()][c];
    rgb[at + c] = static_cast<std::uint8_t>(std::lround(v));
  }
}

void write_overlay(const std::filesystem::path& path, const Image& image,
                   const SegmentationMap& pred, const SegmentationMap& truth) {
  const std::size_t H = image.height(), W = image.width(), gap = 2;
  const std::size_t total_w = 3 * W + 2 * gap;
  std::vector<std::uint8_t> rgb(H * total_w * 3, 255);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      const double g = image.at(y, x);
      blend(rgb, (y * total_w + x) * 3, g, 0);
      blend(rgb, (y * total_w + W + gap + x) * 3, g, pred.at(y, x));
      blend(rgb, (y * total_w + 2 * (W + gap) + x) * 3, g, truth.at(y, x));
    }
  }
  std::string header = "P6\n" + std::to_string(total_w) + " " + std::to_string(H) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), rgb.begin(), rgb.end());
  write_file(path, bytes);
}

}  // namespace

std::optional<double> dice(const SegmentationMap& pred, const SegmentationMap& truth,
                           std::size_t label) {
  check_pair(pred, truth);
  std::size_t a = 0, b = 0, both = 0;
  const std::size_t n = pred.height() * pred.width();
  for (std::size_t j = 0; j < n; ++j) {
    const bool p = pred[j] == label, t = truth[j] == label;
    a += p;
    b += t;
    both += p && t;
  }
  if (a + b == 0) return std::nullopt;
  return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

DiceReport dice_report(const SegmentationMap& pred, const SegmentationMap& truth) {
  check_pair(pred, truth);
  const std::size_t L = pred.num_labels();
  DiceReport r;
  double acc = 0.0;
  std::size_t defined = 0;
  for (std::size_t l = 0; l < L; ++l) {
    r.per_label.push_back(dice(pred, truth, l));
    r.pred_counts.push_back(pred.count(static_cast<std::uint8_t>(l)));
    r.truth_counts.push_back(truth.count(static_cast<std::uint8_t>(l)));
    if (l > 0 && r.per_label.back()) {
      acc += *r.per_label.back();
      ++defined;
    }
  }
  if (defined > 0) r.mean_foreground = acc / static_cast<double>(defined);
  return r;
}

SegmentationMap baseline_locprior(const LocationPrior& loc) {
  loc.validate();
  return SegmentationMap::argmax(loc.probs);
}

double brute_force_log_marginal(const Image& x, const Grid& f,
                                const AppearanceParams& app) {
  const std::size_t L = app.num_labels();
  const std::size_t n = x.pixels.size();
  if (f.rank() != 3 || f.dim(0) != x.height() || f.dim(1) != x.width() || f.dim(2) != L) {
    throw DimensionError("brute_force_log_marginal: f must be [H, W, L] over x");
  }
  if (n > 9 || L > 3) {
    throw ContractError("brute_force_log_marginal: instance too large to enumerate");
  }
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  // log f[j, l] + log N(x[j]; mu_l, sigma_l^2) per voxel and label.
  std::vector<double> term(n * L);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < L; ++l) {
      const double r = x.pixels[j] - app.mu.value[l];
      const double s = app.sigma[l];
      term[j * L + l] = std::log(f[j * L + l]) - r * r / (2.0 * s * s) - std::log(s) -
                        half_log_2pi;
    }
  }
  std::size_t maps = 1;
  for (std::size_t j = 0; j < n; ++j) maps *= L;
  std::vector<double> logs(maps);
  std::vector<std::size_t> s(n, 0);
  for (std::size_t m = 0; m < maps; ++m) {
    double v = 0.0;
    for (std::size_t j = 0; j < n; ++j) v += term[j * L + s[j]];
    logs[m] = v;
    for (std::size_t j = 0; j < n; ++j) {
      if (++s[j] < L) break;
      s[j] = 0;
    }
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  if (top == -std::numeric_limits<double>::infinity()) return top;
  double acc = 0.0;
  for (double v : logs) acc += std::exp(v - top);
  return top + std::log(acc);
}

ReportSummary emit_report(const EvalResults& results, const std::filesystem::path& out_dir,
                          const ReportOptions& options) {
  const std::size_t M = results.methods.size();
  if (M == 0) throw ContractError("report needs at least one method");
  std::size_t L = 0;
  for (const EvalItem& item : results.items) {
    if (item.predictions.size() != M) {
      throw ContractError("item " + item.item_id + " lacks a prediction per method");
    }
    L = item.truth.num_labels();
  }

  // scores[method][label] over items with a defined value.
  std::vector<std::vector<std::vector<double>>> scores(M, std::vector<std::vector<double>>(L));
  std::vector<std::vector<double>> item_means(M);
  std::ostringstream metrics;
  metrics << "item_id,label,dice,method\n";
  for (const EvalItem& item : results.items) {
    for (std::size_t m = 0; m < M; ++m) {
      const DiceReport r = dice_report(item.predictions[m], item.truth);
      for (std::size_t l = 1; l < L; ++l) {
        const double v = r.per_label[l].value_or(std::numeric_limits<double>::quiet_NaN());
        metrics << item.item_id << ',' << l << ',' << fixed(v) << ','
                << results.methods[m] << '\n';
        if (r.per_label[l]) scores[m][l].push_back(*r.per_label[l]);
      }
      if (r.mean_foreground) item_means[m].push_back(*r.mean_foreground);
    }
  }
  const std::string metrics_text = metrics.str();
  write_file(out_dir / "metrics.csv",
             std::vector<std::uint8_t>(metrics_text.begin(), metrics_text.end()));

  auto mean_of = [](const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
  };

  ReportSummary summary;
  std::ostringstream box;
  box << "label,method,n,min,q1,median,q3,max,mean\n";
  for (std::size_t l = 1; l < L; ++l) {
    for (std::size_t m = 0; m < M; ++m) {
      std::vector<double> v = scores[m][l];
      std::sort(v.begin(), v.end());
      box << l << ',' << results.methods[m] << ',' << v.size();
      if (v.empty()) {
        box << ",NA,NA,NA,NA,NA,NA\n";
        continue;
      }
      box << ',' << fixed(v.front()) << ',' << fixed(quantile(v, 0.25)) << ','
          << fixed(quantile(v, 0.5)) << ',' << fixed(quantile(v, 0.75)) << ','
          << fixed(v.back()) << ',' << fixed(mean_of(v)) << '\n';
    }
  }
  const std::string box_text = box.str();
  write_file(out_dir / "boxplot.csv",
             std::vector<std::uint8_t>(box_text.begin(), box_text.end()));

  std::ostringstream text;
  text << "items " << results.items.size() << "\n";
  for (std::size_t m = 0; m < M; ++m) {
    summary.mean_dice.push_back(mean_of(item_means[m]));
    summary.mean_label_dice.emplace_back(L, std::numeric_limits<double>::quiet_NaN());
    text << results.methods[m] << " mean_dice " << fixed(summary.mean_dice.back());
    for (std::size_t l = 1; l < L; ++l) {
      summary.mean_label_dice[m][l] = mean_of(scores[m][l]);
      text << " label" << l << ' ' << fixed(summary.mean_label_dice[m][l]);
    }
    text << '\n';
  }
  const std::string summary_text = text.str();
  write_file(out_dir / "summary.txt",
             std::vector<std::uint8_t>(summary_text.begin(), summary_text.end()));

  const std::size_t n_overlay = std::min(options.overlays, results.items.size());
  for (std::size_t i = 0; i < n_overlay; ++i) {
    const EvalItem& item = results.items[i];
    write_overlay(out_dir / "overlays" / (item.item_id + ".ppm"), item.image,
                  item.predictions[0], item.truth);
  }
  return summary;
}

}  // namespace anatprior
