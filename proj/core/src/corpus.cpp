#include "anatprior/synthdata/corpus.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "anatprior/errors.hpp"
#include "anatprior/random.hpp"
#include "anatprior/synthdata/volgrid.hpp"

namespace anatprior {

namespace {

std::vector<std::uint64_t> split_seeds(std::uint64_t master, CorpusSplit split,
                                       std::size_t n,
                                       std::unordered_set<std::uint64_t>& used) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(n);
  std::uint64_t index = 0;
  while (seeds.size() < n) {
    const std::uint64_t s =
        derive_seed(master, static_cast<std::uint64_t>(split), index++);
    if (used.insert(s).second) seeds.push_back(s);
  }
  return seeds;
}

// Corpus images are held at f32 precision so a saved corpus reloads
// bit-exactly.
Image at_storage_precision(Image img) {
  for (double& v : img.pixels.values()) v = static_cast<float>(v);
  return img;
}

}  // namespace

std::string item_stem(std::size_t index) {
  std::ostringstream os;
  os << std::setw(4) << std::setfill('0') << index;
  return os.str();
}

Corpus make_corpus(const AnatomyConfig& anatomy, const ModalityConfig& modality_a,
                   const ModalityConfig& modality_b, const CorpusCounts& counts,
                   std::uint64_t master_seed) {
  anatomy.validate();
  modality_a.validate(anatomy.num_labels);
  modality_b.validate(anatomy.num_labels);

  Corpus c;
  std::unordered_set<std::uint64_t> used;
  c.prior_seeds = split_seeds(master_seed, CorpusSplit::prior, counts.prior, used);
  c.unsup_a_seeds = split_seeds(master_seed, CorpusSplit::unsup_a, counts.unsup_a, used);
  c.unsup_b_seeds = split_seeds(master_seed, CorpusSplit::unsup_b, counts.unsup_b, used);
  c.test_seeds = split_seeds(master_seed, CorpusSplit::test, counts.test, used);

  for (std::uint64_t seed : c.prior_seeds) {
    Rng rng(seed);
    c.prior.push_back(generate_anatomy(anatomy, rng));
  }
  for (std::uint64_t seed : c.unsup_a_seeds) {
    Rng rng(seed);
    c.unsup_a.push_back(at_storage_precision(
        render_modality(generate_anatomy(anatomy, rng), modality_a, rng)));
  }
  for (std::uint64_t seed : c.unsup_b_seeds) {
    Rng rng(seed);
    c.unsup_b.push_back(at_storage_precision(
        render_modality(generate_anatomy(anatomy, rng), modality_b, rng)));
  }
  for (std::uint64_t seed : c.test_seeds) {
    Rng rng(seed);
    TestItem item;
    item.truth = generate_anatomy(anatomy, rng);
    item.image_a = at_storage_precision(render_modality(item.truth, modality_a, rng));
    item.image_b = at_storage_precision(render_modality(item.truth, modality_b, rng));
    c.test.push_back(std::move(item));
  }
  return c;
}

void write_corpus(const std::filesystem::path& dir, const Corpus& corpus,
                  const std::string& manifest) {
  namespace fs = std::filesystem;
  for (const char* sub : {"prior", "unsupA", "unsupB", "test"}) {
    fs::create_directories(dir / sub);
  }
  for (std::size_t i = 0; i < corpus.prior.size(); ++i) {
    save_labels(dir / "prior" / (item_stem(i) + ".seg.vgrd"), corpus.prior[i]);
  }
  for (std::size_t i = 0; i < corpus.unsup_a.size(); ++i) {
    save_image(dir / "unsupA" / (item_stem(i) + ".img.vgrd"), corpus.unsup_a[i]);
  }
  for (std::size_t i = 0; i < corpus.unsup_b.size(); ++i) {
    save_image(dir / "unsupB" / (item_stem(i) + ".img.vgrd"), corpus.unsup_b[i]);
  }
  for (std::size_t i = 0; i < corpus.test.size(); ++i) {
    const TestItem& t = corpus.test[i];
    save_labels(dir / "test" / (item_stem(i) + ".seg.vgrd"), t.truth);
    save_image(dir / "test" / (item_stem(i) + ".img.vgrd"), t.image_a);
    save_image(dir / "test" / (item_stem(i) + ".imgB.vgrd"), t.image_b);
  }
  std::ofstream out(dir / "manifest.txt");
  if (!out) throw IoError("cannot write corpus manifest");
  out << manifest;
}

CorpusView read_corpus(const std::filesystem::path& dir, std::size_t num_labels) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw MissingInputError("corpus directory " + dir.string() + " not found");
  }
  CorpusView v;
  auto each = [&](const char* sub, const char* suffix, auto&& fn) {
    for (std::size_t i = 0;; ++i) {
      const fs::path p = dir / sub / (item_stem(i) + suffix);
      if (!fs::exists(p)) break;
      fn(i, p);
    }
  };
  each("prior", ".seg.vgrd", [&](std::size_t, const fs::path& p) {
    v.prior.push_back(load_labels(p, num_labels));
  });
  each("unsupA", ".img.vgrd", [&](std::size_t, const fs::path& p) {
    v.unsup_a.push_back(load_image(p));
  });
  each("unsupB", ".img.vgrd", [&](std::size_t, const fs::path& p) {
    v.unsup_b.push_back(load_image(p));
  });
  each("test", ".seg.vgrd", [&](std::size_t i, const fs::path& p) {
    TestItem item;
    item.truth = load_labels(p, num_labels);
    item.image_a = load_image(dir / "test" / (item_stem(i) + ".img.vgrd"));
    item.image_b = load_image(dir / "test" / (item_stem(i) + ".imgB.vgrd"));
    v.test.push_back(std::move(item));
  });
  return v;
}

}  // namespace anatprior
