#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "anatprior/errors.hpp"
#include "anatprior/segmenter/noise.hpp"
#include "anatprior/segmenter/segmenter.hpp"
#include "anatprior/segmenter/train.hpp"
#include "anatprior/synthdata/anatomy.hpp"
#include "anatprior/verify/checks.hpp"
#include "test_support.hpp"

namespace anatprior {
namespace {

using testing::random_map;
using testing::small_arch;
using testing::small_prior;
using testing::TempDir;

// --- noise estimation -----------------------------------------------------------

Image noise_image(std::size_t H, std::size_t W, double sigma, Rng& rng) {
  Image x(H, W);
  for (double& v : x.pixels.values()) v = sigma * standard_normal(rng);
  return x;
}

TEST(NoiseEstimate, ConstantImageIsZero) {
  Image x(16, 16);
  x.pixels.fill(0.42);
  EXPECT_NEAR(estimate_noise_sigma(x), 0.0, 1e-14);
}

TEST(NoiseEstimate, PureGaussianNoise) {
  Rng rng(1);
  const double est = estimate_noise_sigma(noise_image(128, 128, 0.1, rng));
  EXPECT_GE(est, 0.09);
  EXPECT_LE(est, 0.11);
}

TEST(NoiseEstimate, TooSmallImageRejected) {
  EXPECT_THROW(estimate_noise_sigma(Image(2, 5)), DimensionError);
  EXPECT_THROW(estimate_noise_sigma(std::vector<Image>{}), ContractError);
}

// Axis-aligned rectangles: the mask annihilates straight edges, so only
// corners bias the estimate.
TEST(NoiseEstimate, PiecewiseConstantRectangles) {
  for (double sigma : {0.02, 0.05, 0.1}) {
    Rng rng(2);
    Image x = noise_image(128, 128, sigma, rng);
    for (std::size_t y = 0; y < 128; ++y)
      for (std::size_t c = 0; c < 128; ++c) {
        double base = 0.2;
        if (y >= 20 && y < 100 && c >= 16 && c < 110) base = 0.5;
        if (y >= 40 && y < 70 && c >= 30 && c < 60) base = 0.8;
        if (y >= 75 && y < 95 && c >= 70 && c < 100) base = 0.35;
        x.at(y, c) += base;
      }
    EXPECT_NEAR(estimate_noise_sigma(x) / sigma, 1.0, 0.15) << "sigma " << sigma;
  }
}

TEST(NoiseEstimate, SetEstimateIsMedian) {
  Rng rng(3);
  std::vector<Image> imgs;
  std::vector<double> singles;
  for (double s : {0.01, 0.5, 0.05, 0.2, 0.1}) {
    imgs.push_back(noise_image(32, 32, s, rng));
    singles.push_back(estimate_noise_sigma(imgs.back()));
  }
  std::sort(singles.begin(), singles.end());
  EXPECT_EQ(estimate_noise_sigma(imgs), singles[2]);
}

// --- appearance and reconstruction ---------------------------------------------

TEST(Appearance, EvenlySpacedMeans) {
  EXPECT_EQ(evenly_spaced_means(2), (std::vector<double>{0.0, 1.0}));
  const auto mu = evenly_spaced_means(4);
  EXPECT_DOUBLE_EQ(mu[1], 1.0 / 3.0);
  EXPECT_THROW(AppearanceParams({0.1, 0.2}, {0.1}), DimensionError);
  EXPECT_THROW(AppearanceParams({0.1, 0.2}, {0.1, -1.0}).validate(), Error);
}

TEST(Reconstruct, OneHotGivesLabelMeans) {
  Rng rng(4);
  const SegmentationMap s = random_map(4, 4, 3, rng);
  const AppearanceParams app({0.1, 0.6, 0.9}, {0.1, 0.1, 0.1});
  const Grid xhat = reconstruct_intensity(s.one_hot(), app);
  ASSERT_EQ(xhat.shape(), (Shape{4, 4}));
  for (std::size_t j = 0; j < 16; ++j) EXPECT_DOUBLE_EQ(xhat[j], app.mu.value[s[j]]);
}

TEST(Reconstruct, UniformGivesMeanOfMeans) {
  const AppearanceParams app({0.1, 0.6, 0.8}, {0.1, 0.1, 0.1});
  const Grid xhat = reconstruct_intensity(Grid({2, 2, 3}, 1.0 / 3.0), app);
  for (double v : xhat.values()) EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(Reconstruct, MatchesWeightedSum) {
  Rng rng(5);
  const Grid f = testing::random_simplex({3, 5, 4}, rng);
  const AppearanceParams app({0.1, 0.3, 0.6, 0.9}, {0.1, 0.1, 0.1, 0.1});
  const Grid xhat = reconstruct_intensity(f, app);
  for (std::size_t j = 0; j < 15; ++j) {
    double acc = 0.0;
    for (std::size_t l = 0; l < 4; ++l) acc += f[j * 4 + l] * app.mu.value[l];
    EXPECT_NEAR(xhat[j], acc, 1e-15);
  }
}

// --- models -------------------------------------------------------------------

SegmenterModel small_segmenter(std::uint64_t seed, std::size_t labels = 3) {
  Rng rng(seed);
  const PriorModel prior = small_prior(rng, labels);
  return make_segmenter(prior, std::vector<double>(labels, 0.1), rng);
}

Image random_image(std::size_t H, std::size_t W, Rng& rng) {
  return Image(testing::random_uniform({H, W}, rng));
}

TEST(Segmenter, CopiesPriorDecoderAndLocation) {
  Rng rng(6);
  const PriorModel prior = small_prior(rng);
  const SegmenterModel m = make_segmenter(prior, {0.1, 0.1, 0.1}, rng);
  EXPECT_EQ(m.image_arch.channels, 1u);
  EXPECT_EQ(m.num_labels(), 3u);
  EXPECT_EQ(m.decoder_checksum, parameter_checksum(prior.decoder.named_parameters()));
  EXPECT_EQ(m.location.probs, prior.location.probs);
  EXPECT_NO_THROW(m.verify_decoder());
  EXPECT_EQ(m.appearance.mu.value[2], 1.0);
  EXPECT_THROW(make_segmenter(prior, {0.1, 0.1}, rng), DimensionError);
}

TEST(Segmenter, TamperedDecoderDetected) {
  SegmenterModel m = small_segmenter(7);
  testing::named(m.decoder.named_parameters(), "dense.bias").value[0] += 0.5;
  EXPECT_THROW(m.verify_decoder(), ContractError);
}

TEST(Segmenter, EncodeImageIsPureAndPositive) {
  const SegmenterModel m = small_segmenter(8);
  Rng rng(9);
  const Image x = random_image(8, 8, rng);
  const GaussianPosterior a = encode_image(x, m), b = encode_image(x, m);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.var, b.var);
  for (double v : a.var) EXPECT_GT(v, 0.0);
  EXPECT_THROW(encode_image(random_image(8, 4, rng), m), DimensionError);
}

// --- supervised loss ----------------------------------------------------------

TEST(SupervisedLoss, HugeSigmaLeavesKlPlusCrossEntropy) {
  Rng rng(10);
  const PriorModel prior = small_prior(rng);
  const SegmenterModel m = make_segmenter(prior, {1e12, 1e12, 1e12}, rng);
  const Image x = random_image(8, 8, rng);
  const SegmentationMap s = random_map(8, 8, 3, rng);
  const LatentCode z{{0.3, -0.2, 1.0}};
  const SupervisedLossTerms t = supervised_loss(x, s, z, m);
  EXPECT_LT(t.intensity, 1e-20);
  EXPECT_NEAR(t.total, t.kl + t.cross_entropy, 1e-12);
}

TEST(SupervisedLoss, ExactMeansGiveZeroIntensity) {
  const SegmenterModel m = small_segmenter(11);
  Rng rng(12);
  const SegmentationMap s = random_map(8, 8, 3, rng);
  Image x(8, 8);
  for (std::size_t j = 0; j < 64; ++j) x.pixels[j] = m.appearance.mu.value[s[j]];
  const SupervisedLossTerms t = supervised_loss(x, s, LatentCode{{0, 0, 0}}, m);
  EXPECT_EQ(t.intensity, 0.0);
  EXPECT_DOUBLE_EQ(t.total, t.kl + t.cross_entropy);
}

TEST(SupervisedLoss, MatchesRecomputation) {
  const SegmenterModel m = small_segmenter(13);
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const Image x = random_image(8, 8, rng);
    const SegmentationMap s = random_map(8, 8, 3, rng);
    const LatentCode z{draw_standard_normal(3, rng)};
    const SupervisedLossTerms t = supervised_loss(x, s, z, m);
    const Grid f = decode_segmenter(z, m);
    double ce = 0.0, intensity = 0.0;
    for (std::size_t j = 0; j < 64; ++j) {
      ce -= std::log(f[j * 3 + s[j]]);
      const double r = x.pixels[j] - m.appearance.mu.value[s[j]];
      intensity += r * r / (2.0 * 0.1 * 0.1);
    }
    const GaussianPosterior q = encode_image(x, m);
    EXPECT_NEAR(t.kl, kl_standard_normal(q), 1e-12);
    EXPECT_NEAR(t.cross_entropy, ce, 1e-9);
    EXPECT_NEAR(t.intensity, intensity, 1e-9);
    EXPECT_NEAR(t.total, t.kl + t.cross_entropy + t.intensity, 1e-9);
  }
}

// --- unsupervised loss ----------------------------------------------------------

double log_gauss(double x, double mu, double sigma) {
  const double r = (x - mu) / sigma;
  return -0.5 * r * r - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

TEST(UnsupervisedLoss, OneHotFieldMatchesSupervisedIntensity) {
  Rng rng(15);
  const SegmentationMap s = random_map(4, 4, 3, rng);
  const Image x = random_image(4, 4, rng);
  const AppearanceParams app({0.1, 0.5, 0.9}, {0.05, 0.1, 0.2});
  const UnsupervisedLossTerms t = expected_intensity_terms(x, s.one_hot(), app);
  double intensity = 0.0, norm = 0.0;
  for (std::size_t j = 0; j < 16; ++j) {
    const double sg = app.sigma[s[j]];
    const double r = x.pixels[j] - app.mu.value[s[j]];
    intensity += r * r / (2 * sg * sg);
    norm += std::log(sg) + 0.5 * std::log(2 * std::numbers::pi);
  }
  EXPECT_NEAR(t.intensity, intensity, 1e-10);
  EXPECT_NEAR(t.log_normalizer, norm, 1e-12);
}

TEST(UnsupervisedLoss, DecomposesIntoTerms) {
  const SegmenterModel m = small_segmenter(16);
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Image x = random_image(8, 8, rng);
    const LatentCode z{draw_standard_normal(3, rng)};
    const UnsupervisedLossTerms t = unsupervised_loss(x, z, m);
    EXPECT_NEAR(t.total, t.kl + t.intensity + t.log_normalizer, 1e-9);
    const UnsupervisedLossTerms e =
        expected_intensity_terms(x, decode_segmenter(z, m), m.appearance);
    EXPECT_NEAR(t.intensity, e.intensity, 1e-12);
    EXPECT_NEAR(t.kl, kl_standard_normal(encode_image(x, m)), 1e-12);
  }
}

TEST(UnsupervisedLoss, TapeObjectiveMatchesValueLevel) {
  SegmenterModel m = small_segmenter(18);
  Rng rng(19);
  const Image x = random_image(8, 8, rng);
  const std::vector<double> eta = draw_standard_normal(3, rng);
  const GaussianPosterior q = encode_image(x, m);
  LatentCode z;
  for (int d = 0; d < 3; ++d) z.z.push_back(q.mean[d] + std::sqrt(q.var[d]) * eta[d]);
  ad::Tape tape;
  const ObjectiveTerms obj = unsupervised_objective(tape, x, m, Grid({3}, eta));
  EXPECT_NEAR(obj.total.value()[0], unsupervised_loss(x, z, m).total, 1e-9);
}

// -log p(x|z) by enumerating every map of a 2 x 2, L = 2 image.
double exact_neg_log_marginal(const Image& x, const Grid& f, const AppearanceParams& app) {
  std::vector<double> logs;
  for (int code = 0; code < 16; ++code) {
    double lp = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      const int l = (code >> j) & 1;
      lp += std::log(f[j * 2 + l]) + log_gauss(x.pixels[j], app.mu.value[l], app.sigma[l]);
    }
    logs.push_back(lp);
  }
  const double mx = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double v : logs) s += std::exp(v - mx);
  return -(mx + std::log(s));
}

TEST(UnsupervisedLoss, BoundNeverBelowExactNegativeLogMarginal) {
  Rng rng(20);
  for (int trial = 0; trial < 100; ++trial) {
    const Grid f = testing::random_simplex({2, 2, 2}, rng);
    const Image x = random_image(2, 2, rng);
    const AppearanceParams app({uniform01(rng), uniform01(rng)},
                               {0.05 + 0.45 * uniform01(rng), 0.05 + 0.45 * uniform01(rng)});
    const UnsupervisedLossTerms t = expected_intensity_terms(x, f, app);
    EXPECT_GE(t.intensity + t.log_normalizer, exact_neg_log_marginal(x, f, app) - 1e-12);
  }
}

TEST(UnsupervisedLoss, JensenCheckOnLargerInstances) {
  const verify::CheckResult r = verify::jensen_check(21, 20, 3, 3, 3);
  EXPECT_TRUE(r.passed) << verify::format_result(r);
}

// --- checkpoints ----------------------------------------------------------------

TEST(SegmenterCheckpoint, RoundTrip) {
  TempDir dir;
  const SegmenterModel m = small_segmenter(22);
  save_segmenter(dir / "s.ckpt", m);
  const SegmenterModel back = load_segmenter(dir / "s.ckpt");
  EXPECT_EQ(back.image_arch, m.image_arch);
  // Checkpoint payloads are 32-bit.
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(back.appearance.sigma[l], static_cast<float>(m.appearance.sigma[l]));
  }
  EXPECT_EQ(back.decoder_checksum, m.decoder_checksum);
  EXPECT_NO_THROW(back.verify_decoder());
  Rng rng(23);
  const Image x = random_image(8, 8, rng);
  const GaussianPosterior a = encode_image(x, m), b = encode_image(x, back);
  for (std::size_t d = 0; d < a.dim(); ++d) EXPECT_NEAR(a.mean[d], b.mean[d], 1e-5);
  EXPECT_THROW(load_prior(dir / "s.ckpt"), CorruptFileError);
}

// --- training -------------------------------------------------------------------

struct SmallSetup {
  PriorModel prior;
  std::vector<Image> images;
};

SmallSetup small_setup(std::size_t n, std::uint64_t seed) {
  const AnatomyConfig anatomy = AnatomyConfig::desk_default().scaled(0.25);
  Rng rng(seed);
  std::vector<SegmentationMap> maps;
  for (std::size_t i = 0; i < 64; ++i) maps.push_back(generate_anatomy(anatomy, rng));
  TrainingConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  SmallSetup s{train_prior(maps, small_arch(4), 1e-7, cfg, rng).model, {}};
  for (std::size_t i = 0; i < n; ++i) {
    s.images.push_back(
        render_modality(generate_anatomy(anatomy, rng), ModalityConfig::modality_a(), rng));
  }
  return s;
}

UnsupervisedConfig quick_unsup(std::size_t epochs, double lr = 1.0) {
  UnsupervisedConfig cfg;
  cfg.training.epochs = epochs;
  cfg.training.batch_size = 8;
  cfg.training.optimizer.learning_rate = lr;
  return cfg;
}

TEST(TrainUnsupervised, DecoderStaysBitIdentical) {
  const SmallSetup s = small_setup(32, 1);
  Rng rng(2);
  const SegmenterTrainingResult r = train_unsupervised(s.images, s.prior, quick_unsup(3), rng);
  EXPECT_EQ(r.model.decoder_checksum, parameter_checksum(s.prior.decoder.named_parameters()));
  const auto a = r.model.decoder.named_parameters();
  const auto b = s.prior.decoder.named_parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].second->value, b[i].second->value);
  EXPECT_EQ(r.model.location.probs, s.prior.location.probs);
}

TEST(TrainUnsupervised, ZeroLearningRateChangesNothing) {
  const SmallSetup s = small_setup(16, 3);
  Rng r1(4), r2(4);
  UnsupervisedConfig cfg = quick_unsup(2, 0.0);
  const SegmenterTrainingResult r = train_unsupervised(s.images, s.prior, cfg, r1);
  const SegmenterModel fresh =
      make_segmenter(s.prior, resolve_sigma(s.images, cfg, 4), r2);
  EXPECT_EQ(r.model.appearance.mu.value, fresh.appearance.mu.value);
  EXPECT_EQ(parameter_checksum(r.model.encoder.named_parameters()),
            parameter_checksum(fresh.encoder.named_parameters()));
}

TEST(TrainUnsupervised, FrozenMeansStayPut) {
  const SmallSetup s = small_setup(16, 5);
  Rng rng(6);
  UnsupervisedConfig cfg = quick_unsup(2);
  cfg.train_mu = false;
  const SegmenterTrainingResult r = train_unsupervised(s.images, s.prior, cfg, rng);
  EXPECT_EQ(r.model.appearance.mu.value, Grid({4}, evenly_spaced_means(4)));
  EXPECT_TRUE(r.model.appearance.mu.trainable);
}

TEST(TrainUnsupervised, LossDecreasesAndRunsAreIdentical) {
  const SmallSetup s = small_setup(64, 7);
  auto run = [&] {
    Rng rng(8);
    return train_unsupervised(s.images, s.prior, quick_unsup(6), rng);
  };
  const SegmenterTrainingResult a = run(), b = run();
  EXPECT_LT(a.trace.epochs.back().loss, a.trace.epochs.front().loss);
  EXPECT_EQ(a.trace.data_term_name, "intensity");
  for (std::size_t e = 0; e < a.trace.epochs.size(); ++e) {
    EXPECT_EQ(a.trace.epochs[e].loss, b.trace.epochs[e].loss);
  }
  EXPECT_EQ(a.model.appearance.mu.value, b.model.appearance.mu.value);
}

TEST(TrainUnsupervised, InvalidInputsRejected) {
  const SmallSetup s = small_setup(4, 9);
  Rng rng(10);
  EXPECT_THROW(train_unsupervised(std::vector<Image>{}, s.prior, quick_unsup(1), rng),
               ContractError);
  EXPECT_THROW(train_unsupervised(std::vector<Image>{Image(16, 16)}, s.prior, quick_unsup(1),
                                  rng),
               DimensionError);
  UnsupervisedConfig cfg = quick_unsup(1);
  cfg.initial_encoder = ConvEncoder([] {
    ArchitectureConfig a = small_arch(1);
    a.latent_dim = 5;
    return a;
  }(), rng);
  EXPECT_THROW(train_unsupervised(s.images, s.prior, cfg, rng), ConfigError);
}

TEST(ResolveSigma, Modes) {
  Rng rng(11);
  std::vector<Image> imgs;
  for (int i = 0; i < 3; ++i) imgs.push_back(noise_image(16, 16, 0.1, rng));
  UnsupervisedConfig cfg;
  const auto est = resolve_sigma(imgs, cfg, 4);
  ASSERT_EQ(est.size(), 4u);
  EXPECT_EQ(est[0], estimate_noise_sigma(imgs));
  EXPECT_EQ(est[3], est[0]);

  cfg.sigma_mode = SigmaMode::per_label;
  cfg.sigma_values = {0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(resolve_sigma(imgs, cfg, 4), cfg.sigma_values);
  EXPECT_THROW(resolve_sigma(imgs, cfg, 3), ConfigError);

  cfg.sigma_mode = SigmaMode::fixed;
  cfg.sigma_values = {0.07};
  EXPECT_EQ(resolve_sigma(imgs, cfg, 2), (std::vector<double>{0.07, 0.07}));
  cfg.sigma_values = {-0.07};
  EXPECT_THROW(resolve_sigma(imgs, cfg, 2), ConfigError);

  Image flat(8, 8);
  flat.pixels.fill(0.3);
  cfg.sigma_mode = SigmaMode::estimated;
  EXPECT_THROW(resolve_sigma(std::vector{flat}, cfg, 2), ConfigError);
}

TEST(ResolveSigma, ModeNamesRoundTrip) {
  for (SigmaMode m : {SigmaMode::estimated, SigmaMode::per_label, SigmaMode::fixed}) {
    EXPECT_EQ(parse_sigma_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_sigma_mode("median"), ConfigError);
}

// --- encoder pretraining --------------------------------------------------------

TEST(Pretrain, ZeroEpochsReturnsInitialization) {
  const SmallSetup s = small_setup(8, 12);
  const ArchitectureConfig a = image_architecture(s.prior.arch);
  PretrainConfig cfg;
  cfg.training.epochs = 0;
  Rng r1(13), r2(13);
  const PretrainResult r = pretrain_image_encoder(s.images, a, cfg, r1);
  const ConvEncoder fresh(a, r2);
  EXPECT_EQ(parameter_checksum(r.encoder.named_parameters()),
            parameter_checksum(fresh.named_parameters()));
  EXPECT_TRUE(r.trace.epochs.empty());
}

TEST(Pretrain, ReconstructionLossDecreases) {
  const SmallSetup s = small_setup(128, 14);
  PretrainConfig cfg;
  cfg.training.epochs = 5;
  cfg.training.batch_size = 8;
  Rng rng(15);
  const PretrainResult r =
      pretrain_image_encoder(s.images, image_architecture(s.prior.arch), cfg, rng);
  EXPECT_EQ(r.trace.data_term_name, "reconstruction");
  EXPECT_LT(r.trace.epochs.back().loss, r.trace.epochs.front().loss);
}

TEST(Pretrain, InvalidConfigRejected) {
  const SmallSetup s = small_setup(4, 16);
  PretrainConfig cfg;
  cfg.recon_sigma = 0.0;
  Rng rng(17);
  EXPECT_THROW(pretrain_image_encoder(s.images, image_architecture(s.prior.arch), cfg, rng),
               ConfigError);
  EXPECT_THROW(pretrain_image_encoder(s.images, s.prior.arch, PretrainConfig{}, rng),
               ConfigError);
}

// Median over seeds of the first-epoch bound, with and without a pretrained
// image encoder as the starting point. Desk-size grid: at 8 x 8 the image VAE
// has too little structure to learn for the effect to show.
TEST(Pretrain, PretrainedInitLowersFirstEpochLoss) {
  const AnatomyConfig anatomy = AnatomyConfig::desk_default();
  Rng rng(400);
  std::vector<SegmentationMap> maps;
  for (int i = 0; i < 500; ++i) maps.push_back(generate_anatomy(anatomy, rng));
  TrainingConfig prior_cfg;
  prior_cfg.epochs = 8;
  const PriorModel prior = train_prior(maps, ArchitectureConfig{}, 1e-7, prior_cfg, rng).model;

  std::vector<double> with, without;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng data_rng(500 + seed);
    std::vector<Image> images;
    for (int i = 0; i < 300; ++i) {
      images.push_back(render_modality(generate_anatomy(anatomy, data_rng),
                                       ModalityConfig::modality_a(), data_rng));
    }
    PretrainConfig pcfg;
    pcfg.training.epochs = 3;
    Rng prng(600 + seed);
    const PretrainResult pre =
        pretrain_image_encoder(images, image_architecture(prior.arch), pcfg, prng);
    UnsupervisedConfig cfg;
    cfg.training.epochs = 1;
    Rng r1(700 + seed), r2(700 + seed);
    without.push_back(train_unsupervised(images, prior, cfg, r1).trace.epochs[0].loss);
    cfg.initial_encoder = pre.encoder;
    with.push_back(train_unsupervised(images, prior, cfg, r2).trace.epochs[0].loss);
  }
  for (std::size_t i = 0; i < 5; ++i) {
    std::printf("seed %zu: pretrained %.1f, random %.1f\n", i, with[i], without[i]);
  }
  std::sort(with.begin(), with.end());
  std::sort(without.begin(), without.end());
  EXPECT_LT(with[2], without[2]);
}

}  // namespace
}  // namespace anatprior
