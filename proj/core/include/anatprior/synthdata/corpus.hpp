#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "anatprior/prior/segmentation.hpp"
#include "anatprior/synthdata/anatomy.hpp"
#include "anatprior/synthdata/image.hpp"

namespace anatprior {

struct CorpusCounts {
  std::size_t prior = 2000;
  std::size_t unsup_a = 2000;
  std::size_t unsup_b = 2000;
  std::size_t test = 200;
};

// A held-out anatomy rendered in both modalities.
struct TestItem {
  SegmentationMap truth;
  Image image_a;
  Image image_b;
};

// Four disjoint splits. The prior split exposes only label maps and the
// unsupervised splits only images; each item has its own seed.
struct Corpus {
  std::vector<SegmentationMap> prior;
  std::vector<Image> unsup_a;
  std::vector<Image> unsup_b;
  std::vector<TestItem> test;

  std::vector<std::uint64_t> prior_seeds;
  std::vector<std::uint64_t> unsup_a_seeds;
  std::vector<std::uint64_t> unsup_b_seeds;
  std::vector<std::uint64_t> test_seeds;
};

enum class CorpusSplit : std::uint64_t { prior = 1, unsup_a = 2, unsup_b = 3, test = 4 };

// Pure function of its arguments. Seeds never repeat across splits.
Corpus make_corpus(const AnatomyConfig& anatomy, const ModalityConfig& modality_a,
                   const ModalityConfig& modality_b, const CorpusCounts& counts,
                   std::uint64_t master_seed);

// corpus/{prior,unsupA,unsupB,test}/NNNN.{seg,img}.vgrd; test items also
// carry NNNN.imgB.vgrd. `manifest` is written verbatim to manifest.txt.
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus,
                  const std::string& manifest);

struct CorpusView {
  std::vector<SegmentationMap> prior;
  std::vector<Image> unsup_a;
  std::vector<Image> unsup_b;
  std::vector<TestItem> test;
};

// Loads whichever splits are present; missing directories yield empty splits.
CorpusView read_corpus(const std::filesystem::path& dir, std::size_t num_labels);

std::string item_stem(std::size_t index);

}  // namespace anatprior
