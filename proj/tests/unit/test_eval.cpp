#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "anatprior/errors.hpp"
#include "anatprior/eval/eval.hpp"
#include "anatprior/synthdata/volgrid.hpp"
#include "test_support.hpp"

namespace anatprior {
namespace {

using testing::random_map;
using testing::TempDir;

SegmentationMap map_of(std::vector<std::uint8_t> labels, std::size_t L = 3) {
  const std::size_t n = labels.size();
  return SegmentationMap(1, n, L, std::move(labels));
}

TEST(Dice, IdenticalAndDisjoint) {
  const SegmentationMap a = map_of({0, 1, 1, 2});
  EXPECT_EQ(dice(a, a, 1), 1.0);
  EXPECT_EQ(dice(a, a, 2), 1.0);
  const SegmentationMap b = map_of({1, 0, 0, 0});
  EXPECT_EQ(dice(a, b, 1), 0.0);
}

TEST(Dice, HandWorkedExample) {
  // pred label 1 at {0, 1}, truth at {1, 2}: 2 * 1 / (2 + 2).
  EXPECT_EQ(dice(map_of({1, 1, 0, 0}), map_of({0, 1, 1, 0}), 1), 0.5);
}

TEST(Dice, UndefinedWhenLabelAbsentFromBoth) {
  const SegmentationMap a = map_of({0, 1, 1, 0});
  EXPECT_FALSE(dice(a, a, 2).has_value());
  const DiceReport r = dice_report(a, a);
  EXPECT_FALSE(r.per_label[2].has_value());
  EXPECT_EQ(r.mean_foreground, 1.0);
  EXPECT_FALSE(dice_report(map_of({0, 0}), map_of({0, 0})).mean_foreground.has_value());
}

TEST(Dice, SymmetricAndBounded) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const SegmentationMap a = random_map(5, 5, 4, rng), b = random_map(5, 5, 4, rng);
    for (std::size_t l = 0; l < 4; ++l) {
      const auto ab = dice(a, b, l), ba = dice(b, a, l);
      ASSERT_EQ(ab.has_value(), ba.has_value());
      if (!ab) continue;
      EXPECT_EQ(*ab, *ba);
      EXPECT_GE(*ab, 0.0);
      EXPECT_LE(*ab, 1.0);
    }
  }
}

TEST(Dice, ShapeMismatchRejected) {
  EXPECT_THROW(dice(map_of({0, 1}), map_of({0, 1, 1}), 1), DimensionError);
  EXPECT_THROW(dice(map_of({0, 1}), map_of({0, 1}, 2), 1), DimensionError);
}

TEST(DiceReport, CountsAndMean) {
  const SegmentationMap pred = map_of({1, 1, 2, 0}), truth = map_of({1, 2, 2, 0});
  const DiceReport r = dice_report(pred, truth);
  EXPECT_EQ(r.pred_counts, (std::vector<std::size_t>{1, 2, 1}));
  EXPECT_EQ(r.truth_counts, (std::vector<std::size_t>{1, 1, 2}));
  ASSERT_TRUE(r.per_label[1] && r.per_label[2]);
  EXPECT_DOUBLE_EQ(*r.per_label[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*r.per_label[2], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*r.mean_foreground, 2.0 / 3.0);
}

TEST(Baseline, OneHotPriorReproducesItsMap) {
  Rng rng(2);
  const SegmentationMap s = random_map(6, 6, 3, rng);
  const LocationPrior loc = compute_location_prior(std::vector{s}, 1e-7);
  EXPECT_EQ(baseline_locprior(loc), s);
}

TEST(Baseline, UniformPriorGivesBackground) {
  const SegmentationMap b = baseline_locprior(uniform_location_prior(4, 4, 3));
  EXPECT_EQ(b, SegmentationMap(4, 4, 3, 0));
}

double log_normal_pdf(double x, double mu, double sigma) {
  const double r = (x - mu) / sigma;
  return -0.5 * r * r - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

TEST(BruteForce, OneVoxelHandFormula) {
  const Image x(Grid({1, 1}, std::vector<double>{0.4}));
  const Grid f({1, 1, 2}, std::vector<double>{0.3, 0.7});
  const AppearanceParams app({0.2, 0.9}, {0.1, 0.3});
  const double expected =
      std::log(0.3 * std::exp(log_normal_pdf(0.4, 0.2, 0.1)) +
               0.7 * std::exp(log_normal_pdf(0.4, 0.9, 0.3)));
  EXPECT_NEAR(brute_force_log_marginal(x, f, app), expected, 1e-12);
}

TEST(BruteForce, DegenerateCategoricalGivesSingleMapLikelihood) {
  Rng rng(3);
  const SegmentationMap s = random_map(2, 2, 3, rng);
  const Image x(testing::random_uniform({2, 2}, rng));
  const AppearanceParams app({0.1, 0.5, 0.9}, {0.1, 0.2, 0.15});
  double expected = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    expected += log_normal_pdf(x.pixels[j], app.mu.value[s[j]], app.sigma[s[j]]);
  }
  EXPECT_NEAR(brute_force_log_marginal(x, s.one_hot(), app), expected, 1e-12);
}

TEST(BruteForce, FactorizesOverVoxels) {
  // The sum over maps of a product factorizes into per-voxel mixtures.
  Rng rng(4);
  const Grid f = testing::random_simplex({3, 3, 3}, rng);
  const Image x(testing::random_uniform({3, 3}, rng));
  const AppearanceParams app({0.2, 0.5, 0.7}, {0.1, 0.2, 0.3});
  double expected = 0.0;
  for (std::size_t j = 0; j < 9; ++j) {
    double mix = 0.0;
    for (std::size_t l = 0; l < 3; ++l) {
      mix += f[j * 3 + l] * std::exp(log_normal_pdf(x.pixels[j], app.mu.value[l], app.sigma[l]));
    }
    expected += std::log(mix);
  }
  EXPECT_NEAR(brute_force_log_marginal(x, f, app), expected, 1e-10);
}

TEST(BruteForce, JensenBoundHoldsOnRandomInstances) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Grid f = testing::random_simplex({2, 2, 2}, rng);
    const Image x(testing::random_uniform({2, 2}, rng));
    const AppearanceParams app({uniform01(rng), uniform01(rng)},
                               {0.05 + 0.45 * uniform01(rng), 0.05 + 0.45 * uniform01(rng)});
    double expected_ll = 0.0;
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t l = 0; l < 2; ++l)
        expected_ll += f[j * 2 + l] * log_normal_pdf(x.pixels[j], app.mu.value[l], app.sigma[l]);
    EXPECT_LE(expected_ll, brute_force_log_marginal(x, f, app) + 1e-12);
  }
}

TEST(BruteForce, OversizedInstancesRefused) {
  const AppearanceParams app2({0.1, 0.9}, {0.1, 0.1});
  EXPECT_THROW(brute_force_log_marginal(Image(4, 3), Grid({4, 3, 2}, 0.5), app2), ContractError);
  const AppearanceParams app4({0.1, 0.3, 0.6, 0.9}, {0.1, 0.1, 0.1, 0.1});
  EXPECT_THROW(brute_force_log_marginal(Image(1, 2), Grid({1, 2, 4}, 0.25), app4),
               ContractError);
  EXPECT_THROW(brute_force_log_marginal(Image(2, 2), Grid({2, 3, 2}, 0.5), app2),
               DimensionError);
}

// --- report ---------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EvalResults small_results(std::uint64_t seed) {
  Rng rng(seed);
  EvalResults r;
  r.methods = {"model", "baseline_locprior"};
  for (int i = 0; i < 5; ++i) {
    EvalItem item;
    item.item_id = "000" + std::to_string(i);
    item.image = Image(testing::random_uniform({4, 4}, rng));
    item.truth = random_map(4, 4, 3, rng);
    item.predictions = {item.truth, random_map(4, 4, 3, rng)};
    r.items.push_back(std::move(item));
  }
  return r;
}

TEST(Report, WritesAllFiles) {
  TempDir dir;
  const ReportSummary sum = emit_report(small_results(6), dir / "report", ReportOptions{2});
  EXPECT_EQ(sum.mean_dice.size(), 2u);
  EXPECT_DOUBLE_EQ(sum.mean_dice[0], 1.0);
  EXPECT_LT(sum.mean_dice[1], 1.0);
  const std::string metrics = slurp(dir / "report" / "metrics.csv");
  EXPECT_EQ(metrics.rfind("item_id,label,dice,method\n", 0), 0u);
  EXPECT_NE(metrics.find("0000,1,1.000000,model\n"), std::string::npos);
  EXPECT_NE(metrics.find(",baseline_locprior\n"), std::string::npos);
  EXPECT_EQ(slurp(dir / "report" / "boxplot.csv").rfind("label,method,n,min,q1,median,q3,max,mean\n", 0),
            0u);
  EXPECT_TRUE(std::filesystem::exists(dir / "report" / "summary.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report" / "overlays" / "0000.ppm"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report" / "overlays" / "0001.ppm"));
  EXPECT_FALSE(std::filesystem::exists(dir / "report" / "overlays" / "0002.ppm"));
  const std::string ppm = slurp(dir / "report" / "overlays" / "0000.ppm");
  // Three 4-wide panels separated by 2-voxel gaps.
  EXPECT_EQ(ppm.rfind("P6\n16 4\n255\n", 0), 0u);
  EXPECT_EQ(ppm.size(), std::string("P6\n16 4\n255\n").size() + 16u * 4u * 3u);
}

TEST(Report, UndefinedDiceWrittenAsNA) {
  TempDir dir;
  EvalResults r;
  r.methods = {"model"};
  EvalItem item{"0000", Image(1, 2), map_of({0, 1}), {map_of({0, 1})}};
  r.items.push_back(item);
  emit_report(r, dir / "out", ReportOptions{0});
  const std::string metrics = slurp(dir / "out" / "metrics.csv");
  EXPECT_NE(metrics.find("0000,2,NA,model\n"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(dir / "out" / "overlays" / "0000.ppm"));
}

TEST(Report, DeterministicOutput) {
  TempDir dir;
  emit_report(small_results(7), dir / "a");
  emit_report(small_results(7), dir / "b");
  for (const char* f : {"metrics.csv", "boxplot.csv", "summary.txt"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
}

TEST(Report, MissingPredictionRejected) {
  TempDir dir;
  EvalResults r = small_results(8);
  r.items[1].predictions.pop_back();
  EXPECT_THROW(emit_report(r, dir / "x"), ContractError);
}

}  // namespace
}  // namespace anatprior
