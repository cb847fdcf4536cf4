#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "anatprior/errors.hpp"
#include "anatprior/prior/location_prior.hpp"
#include "anatprior/segmenter/noise.hpp"
#include "anatprior/synthdata/anatomy.hpp"
#include "anatprior/synthdata/corpus.hpp"
#include "anatprior/synthdata/volgrid.hpp"
#include "test_support.hpp"

namespace anatprior {
namespace {

using testing::TempDir;

// --- anatomy ----------------------------------------------------------------

TEST(Anatomy, DeskDefaultIsValid) {
  const AnatomyConfig cfg = AnatomyConfig::desk_default();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.height, 32u);
  EXPECT_EQ(cfg.num_labels, 4u);
  Rng rng(1);
  const SegmentationMap s = generate_anatomy(cfg, rng);
  for (std::uint8_t l = 1; l < 4; ++l) EXPECT_GE(s.count(l), cfg.min_voxels);
}

TEST(Anatomy, ZeroJitterGivesIdenticalMaps) {
  AnatomyConfig cfg = AnatomyConfig::desk_default();
  cfg.global_shift = 0.0;
  for (StructureSpec& s : cfg.structures) {
    s.center_jitter = s.radius_jitter = s.warp = s.rotation_jitter = 0.0;
  }
  Rng a(1), b(999);
  const SegmentationMap first = generate_anatomy(cfg, a);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(generate_anatomy(cfg, b), first);
}

TEST(Anatomy, JitteredDrawsGiveNonDegenerateLocationPrior) {
  const AnatomyConfig cfg = AnatomyConfig::desk_default();
  Rng rng(2);
  std::vector<SegmentationMap> maps;
  for (int i = 0; i < 1000; ++i) maps.push_back(generate_anatomy(cfg, rng));
  const LocationPrior loc = compute_location_prior(maps, 1e-7);
  std::size_t uncertain = 0;
  for (std::size_t j = 0; j < 32 * 32; ++j) {
    double mx = 0.0;
    for (std::size_t l = 0; l < 4; ++l) mx = std::max(mx, loc.probs[j * 4 + l]);
    uncertain += mx < 0.99;
  }
  EXPECT_GT(uncertain, 50u);
}

// Painting on a canvas padded by 8 voxels consumes the same random stream;
// the cropped result must match and the padding must stay background.
TEST(Anatomy, StructuresStayInsideGridOverManySeeds) {
  const AnatomyConfig cfg = AnatomyConfig::desk_default();
  AnatomyConfig padded = cfg;
  padded.height += 16;
  padded.width += 16;
  for (StructureSpec& s : padded.structures) {
    s.center_y += 8.0;
    s.center_x += 8.0;
  }
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    Rng a(seed), b(seed);
    const SegmentationMap s = generate_anatomy(cfg, a);
    const SegmentationMap big = generate_anatomy(padded, b);
    std::size_t fg_big = 0, fg = 0;
    for (std::size_t j = 0; j < big.size(); ++j) fg_big += big[j] != 0;
    for (std::size_t j = 0; j < s.size(); ++j) fg += s[j] != 0;
    ASSERT_EQ(fg, fg_big) << "seed " << seed;
    for (std::size_t y = 0; y < 32; ++y)
      for (std::size_t x = 0; x < 32; ++x) ASSERT_EQ(s.at(y, x), big.at(y + 8, x + 8));
  }
}

TEST(Anatomy, ExhaustedRetriesRaise) {
  AnatomyConfig cfg = AnatomyConfig::desk_default();
  cfg.min_voxels = 10000;
  Rng rng(3);
  EXPECT_THROW(generate_anatomy(cfg, rng), ConfigError);
}

TEST(Anatomy, ConfigurationsThatLeaveTheGridRejected) {
  AnatomyConfig cfg = AnatomyConfig::desk_default();
  cfg.structures[0].radius_y = 20.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = AnatomyConfig::desk_default();
  cfg.structures.pop_back();
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Anatomy, ScaledLayoutIsValid) {
  for (double f : {0.25, 2.0, 4.0}) {
    const AnatomyConfig cfg = AnatomyConfig::desk_default().scaled(f);
    EXPECT_NO_THROW(cfg.validate());
    Rng rng(4);
    EXPECT_EQ(generate_anatomy(cfg, rng).height(), static_cast<std::size_t>(32 * f));
  }
}

// --- rendering ----------------------------------------------------------------

TEST(Render, VanishingNoiseGivesLabelMeans) {
  Rng rng(5);
  const SegmentationMap s = generate_anatomy(AnatomyConfig::desk_default(), rng);
  ModalityConfig m = ModalityConfig::modality_a();
  m.sigma = 1e-300;
  const Image x = render_modality(s, m, rng);
  for (std::size_t j = 0; j < s.size(); ++j) EXPECT_EQ(x.pixels[j], m.means[s[j]]);
}

TEST(Render, PerLabelStatistics) {
  Rng rng(6);
  const SegmentationMap s = generate_anatomy(AnatomyConfig::desk_default().scaled(4), rng);
  const ModalityConfig m = ModalityConfig::modality_a();
  const Image x = render_modality(s, m, rng);
  for (std::uint8_t l = 0; l < 4; ++l) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j] != l) continue;
      sum += x.pixels[j];
      ++n;
    }
    ASSERT_GT(n, 100u);
    EXPECT_NEAR(sum / n, m.means[l], 3.0 * m.sigma / std::sqrt(static_cast<double>(n)));
  }
  for (double v : x.pixels.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Render, NoiseEstimateOnRenderedAnatomy) {
  Rng rng(7);
  const SegmentationMap s = generate_anatomy(AnatomyConfig::desk_default().scaled(4), rng);
  ModalityConfig m = ModalityConfig::modality_a();
  m.sigma = 0.05;
  const double est = estimate_noise_sigma(render_modality(s, m, rng));
  EXPECT_GE(est, 0.04);
  EXPECT_LE(est, 0.06);
}

TEST(Render, InvalidModalityRejected) {
  ModalityConfig m = ModalityConfig::modality_a();
  m.means.pop_back();
  EXPECT_THROW(m.validate(4), ConfigError);
  m = ModalityConfig::modality_a();
  m.sigma = 0.0;
  EXPECT_THROW(m.validate(4), ConfigError);
  m = ModalityConfig::modality_a();
  m.means = {0.5, 0.5, 0.5, 0.2};
  EXPECT_THROW(m.validate(4), ConfigError);
  m.means = {0.5, 0.5, 0.8, 0.2};  // two equal means are allowed
  EXPECT_NO_THROW(m.validate(4));
}

TEST(Render, BiasFieldShiftsIntensities) {
  Rng r1(8), r2(8);
  const SegmentationMap s(32, 32, 4, 0);
  ModalityConfig flat = ModalityConfig::modality_a();
  flat.sigma = 1e-300;
  ModalityConfig biased = flat;
  biased.bias_amplitude = 0.1;
  const Image a = render_modality(s, flat, r1);
  const Image b = render_modality(s, biased, r2);
  double max_diff = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    max_diff = std::max(max_diff, std::abs(a.pixels[j] - b.pixels[j]));
  }
  EXPECT_GT(max_diff, 0.01);
  EXPECT_LE(max_diff, 0.1 + 1e-12);
}

// --- corpus -------------------------------------------------------------------

CorpusCounts small_counts() { return CorpusCounts{10, 10, 10, 10}; }

Corpus small_corpus(std::uint64_t seed) {
  return make_corpus(AnatomyConfig::desk_default(), ModalityConfig::modality_a(),
                     ModalityConfig::modality_b(), small_counts(), seed);
}

TEST(Corpus, CountsAndDisjointSeeds) {
  const Corpus c = small_corpus(42);
  EXPECT_EQ(c.prior.size(), 10u);
  EXPECT_EQ(c.unsup_a.size(), 10u);
  EXPECT_EQ(c.unsup_b.size(), 10u);
  EXPECT_EQ(c.test.size(), 10u);
  std::set<std::uint64_t> all;
  for (const auto* seeds : {&c.prior_seeds, &c.unsup_a_seeds, &c.unsup_b_seeds, &c.test_seeds}) {
    all.insert(seeds->begin(), seeds->end());
  }
  EXPECT_EQ(all.size(), 40u);
}

TEST(Corpus, PureFunctionOfSeed) {
  const Corpus a = small_corpus(42), b = small_corpus(42), c = small_corpus(43);
  EXPECT_EQ(a.prior, b.prior);
  EXPECT_EQ(a.unsup_a, b.unsup_a);
  EXPECT_EQ(a.unsup_b, b.unsup_b);
  EXPECT_EQ(a.test_seeds, b.test_seeds);
  EXPECT_NE(a.prior, c.prior);
}

TEST(Corpus, TestItemsShareAnatomyAcrossModalities) {
  const Corpus c = small_corpus(5);
  for (const TestItem& t : c.test) {
    EXPECT_EQ(t.image_a.height(), t.truth.height());
    EXPECT_NE(t.image_a, t.image_b);
  }
}

TEST(Corpus, WriteReadRoundTripIsExact) {
  TempDir dir;
  const Corpus c = small_corpus(11);
  write_corpus(dir / "c", c, "seed=11\n");
  const CorpusView v = read_corpus(dir / "c", 4);
  EXPECT_EQ(v.prior, c.prior);
  EXPECT_EQ(v.unsup_a, c.unsup_a);
  EXPECT_EQ(v.unsup_b, c.unsup_b);
  ASSERT_EQ(v.test.size(), c.test.size());
  for (std::size_t i = 0; i < c.test.size(); ++i) {
    EXPECT_EQ(v.test[i].truth, c.test[i].truth);
    EXPECT_EQ(v.test[i].image_a, c.test[i].image_a);
    EXPECT_EQ(v.test[i].image_b, c.test[i].image_b);
  }
}

TEST(Corpus, RegenerationIsByteIdentical) {
  TempDir dir;
  write_corpus(dir / "a", small_corpus(12), "m");
  write_corpus(dir / "b", small_corpus(12), "m");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), dir / "a");
    EXPECT_EQ(read_file(e.path()), read_file(dir / "b" / rel)) << rel;
    ++files;
  }
  EXPECT_EQ(files, 10u + 10u + 10u + 30u + 1u);
}

TEST(Corpus, MissingDirectoryRaises) {
  TempDir dir;
  EXPECT_THROW(read_corpus(dir / "nope", 4), MissingInputError);
}

// --- volume files ---------------------------------------------------------------

TEST(VolGrid, RoundTripF32AndU8) {
  Rng rng(13);
  Grid g = testing::random_normal({3, 4, 5}, rng);
  for (double& v : g.values()) v = static_cast<float>(v);
  VolDtype dtype{};
  EXPECT_EQ(decode_volume(encode_volume(g, VolDtype::f32), &dtype), g);
  EXPECT_EQ(dtype, VolDtype::f32);

  Grid labels({6, 7});
  for (double& v : labels.values()) v = static_cast<double>(rng() % 256);
  EXPECT_EQ(decode_volume(encode_volume(labels, VolDtype::u8), &dtype), labels);
  EXPECT_EQ(dtype, VolDtype::u8);
}

TEST(VolGrid, DamagedBytesRejected) {
  Rng rng(14);
  const std::vector<std::uint8_t> bytes =
      encode_volume(testing::random_normal({4, 4}, rng), VolDtype::f32);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, bytes.size() / 2, bytes.size() - 1}) {
    std::vector<std::uint8_t> t(bytes.begin(), bytes.begin() + cut);
    EXPECT_THROW(decode_volume(t), CorruptFileError) << "cut at " << cut;
  }
  for (std::size_t pos : {std::size_t{0}, std::size_t{5}, bytes.size() / 2, bytes.size() - 2}) {
    std::vector<std::uint8_t> t = bytes;
    t[pos] ^= 0x01;
    EXPECT_THROW(decode_volume(t), CorruptFileError) << "flip at " << pos;
  }
}

TEST(VolGrid, U8RangeEnforced) {
  EXPECT_THROW(encode_volume(Grid({2}, 256.0), VolDtype::u8), Error);
  EXPECT_THROW(encode_volume(Grid({2}, 0.5), VolDtype::u8), Error);
}

TEST(VolGrid, LabelFilesCheckLabelRange) {
  TempDir dir;
  save_labels(dir / "s.vgrd", SegmentationMap(2, 2, 4, 3));
  EXPECT_NO_THROW(load_labels(dir / "s.vgrd", 4));
  EXPECT_THROW(load_labels(dir / "s.vgrd", 3), CorruptFileError);
  EXPECT_THROW(load_image(dir / "s.vgrd"), CorruptFileError);
  EXPECT_THROW(load_image(dir / "missing.vgrd"), MissingInputError);
}

struct Pgm {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> pixels;
};

Pgm read_pgm(const std::filesystem::path& p) {
  const std::vector<std::uint8_t> bytes = read_file(p);
  const std::string text(bytes.begin(), bytes.end());
  Pgm out;
  std::size_t pos = 0;
  auto token = [&] {
    while (std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::size_t start = pos;
    while (!std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    return text.substr(start, pos - start);
  };
  EXPECT_EQ(token(), "P5");
  out.width = std::stoul(token());
  out.height = std::stoul(token());
  EXPECT_EQ(token(), "255");
  ++pos;
  out.pixels.assign(bytes.begin() + static_cast<long>(pos), bytes.end());
  return out;
}

TEST(Export, LabelPgmHasOneGreyLevelPerLabel) {
  TempDir dir;
  Rng rng(15);
  const SegmentationMap s = generate_anatomy(AnatomyConfig::desk_default(), rng);
  export_labels(s, dir / "s.pgm");
  const Pgm pgm = read_pgm(dir / "s.pgm");
  EXPECT_EQ(pgm.width, 32u);
  EXPECT_EQ(pgm.height, 32u);
  ASSERT_EQ(pgm.pixels.size(), 32u * 32u);
  const std::set<std::uint8_t> levels(pgm.pixels.begin(), pgm.pixels.end());
  EXPECT_EQ(levels, (std::set<std::uint8_t>{0, 85, 170, 255}));
}

TEST(Export, ImagePgmMapsUnitRange) {
  TempDir dir;
  Grid g({1, 3}, std::vector<double>{0.0, 0.5, 1.0});
  export_image(g, dir / "x.pgm");
  const Pgm pgm = read_pgm(dir / "x.pgm");
  ASSERT_EQ(pgm.pixels.size(), 3u);
  EXPECT_EQ(pgm.pixels[0], 0);
  EXPECT_NEAR(pgm.pixels[1], 128, 1);
  EXPECT_EQ(pgm.pixels[2], 255);
}

}  // namespace
}  // namespace anatprior
