#include "anatprior/cli/commands.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <ostream>
#include <sstream>

#include "anatprior/eval/eval.hpp"
#include "anatprior/inference/inference.hpp"
#include "anatprior/prior/prior_model.hpp"
#include "anatprior/segmenter/train.hpp"
#include "anatprior/synthdata/corpus.hpp"
#include "anatprior/synthdata/volgrid.hpp"
#include "anatprior/verify/checks.hpp"

namespace anatprior::cli {

namespace fs = std::filesystem;

// Independent random streams per command, all derived from run.seed.
enum Stream : std::uint64_t {
  kPriorStream = 10,
  kPretrainStream = 11,
  kUnsupStream = 12,
  kSampleStream = 13,
  kUncertaintyStream = 14,
};

fs::path Context::resolve(const fs::path& p) const {
  return p.is_absolute() ? p : workdir / p;
}

fs::path Context::path_key(const std::string& key) const {
  return resolve(config.get(key));
}

namespace {

Rng stream_rng(const Context& ctx, Stream stream) {
  return Rng(derive_seed(ctx.config.get_u64("run.seed"), stream, 0));
}

fs::path sibling(const fs::path& file, const std::string& suffix) {
  fs::path p = file;
  p.replace_extension();
  return p.string() + suffix;
}

AnatomyConfig anatomy_config(const Config& c) {
  const std::size_t H = c.get_size("data.height"), W = c.get_size("data.width");
  if (H != W || H == 0 || H % 32 != 0) {
    throw ConfigError("data.height and data.width must be equal multiples of 32");
  }
  if (c.get_size("data.labels") != 4) {
    throw ConfigError("the built-in anatomy has 4 labels; data.labels must be 4");
  }
  return AnatomyConfig::desk_default().scaled(static_cast<double>(H) / 32.0);
}

ModalityConfig modality(const Config& c, char which) {
  ModalityConfig m = which == 'A' ? ModalityConfig::modality_a() : ModalityConfig::modality_b();
  m.sigma = c.get_double(which == 'A' ? "data.sigma_a" : "data.sigma_b");
  m.bias_amplitude = c.get_double("data.bias_amplitude");
  return m;
}

char modality_letter(const std::string& key, const std::string& value) {
  if (value == "A" || value == "a") return 'A';
  if (value == "B" || value == "b") return 'B';
  throw ConfigError(key + " must be A or B, got '" + value + "'");
}

ArchitectureConfig architecture(const Config& c) {
  ArchitectureConfig a;
  a.height = c.get_size("data.height");
  a.width = c.get_size("data.width");
  a.channels = c.get_size("data.labels");
  a.levels = c.get_size("model.levels");
  a.features = c.get_size("model.features");
  a.kernel = c.get_size("model.kernel");
  a.latent_dim = c.get_size("model.latent_dim");
  a.alpha = c.get_double("model.alpha");
  a.validate();
  return a;
}

TrainingConfig training_config(const Config& c, const std::string& epochs_key,
                               const char* what) {
  TrainingConfig t;
  t.epochs = c.get_size(epochs_key);
  t.batch_size = c.get_size("optimizer.batch_size");
  t.optimizer.rho = c.get_double("optimizer.rho");
  t.optimizer.epsilon = c.get_double("optimizer.epsilon");
  t.optimizer.learning_rate = c.get_double("optimizer.learning_rate");
  t.on_epoch = [what](const EpochRecord& r) {
    spdlog::info("{} epoch {} loss {:.4f} kl {:.4f} data {:.4f} ({:.1f}s)", what, r.epoch,
                 r.loss, r.kl, r.data_term, r.wall_seconds);
  };
  return t;
}

CorpusView load_corpus(const Context& ctx) {
  const fs::path dir = ctx.path_key("paths.corpus");
  if (!fs::exists(dir / "manifest.txt")) {
    throw MissingInputError("no corpus at " + dir.string() + " (run gen-data)");
  }
  return read_corpus(dir, ctx.config.get_size("data.labels"));
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::exists(path)) throw MissingInputError(std::string(what) + " not found: " + path.string());
}

Checkpoint encoder_checkpoint(const ConvEncoder& enc) {
  Checkpoint ckpt;
  ckpt.kind = "image-encoder";
  put_architecture(ckpt, "arch.", enc.config());
  put_parameters(ckpt, "encoder/", enc.named_parameters());
  return ckpt;
}

ConvEncoder load_encoder(const fs::path& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.kind != "image-encoder") {
    throw CorruptFileError("expected an image-encoder checkpoint, got '" + ckpt.kind + "'");
  }
  Rng unused(0);
  ConvEncoder enc(get_architecture(ckpt, "arch."), unused);
  get_parameters(ckpt, "encoder/", enc.named_parameters());
  return enc;
}

struct LoadedSegmenter {
  SegmenterModel model;
  char modality = 'A';
};

LoadedSegmenter load_segmenter_for(const Context& ctx) {
  const fs::path path = ctx.path_key("paths.segmenter");
  require_file(path, "segmenter checkpoint");
  const Checkpoint ckpt = load_checkpoint(path);
  LoadedSegmenter out{segmenter_from_checkpoint(ckpt), 'A'};
  auto it = ckpt.config.find("train.modality");
  if (it != ckpt.config.end()) out.modality = modality_letter("train.modality", it->second);
  return out;
}

Image load_input_image(const Context& ctx, const std::string& arg) {
  if (arg.empty()) throw UsageError("--image is required");
  const fs::path path = ctx.resolve(arg);
  require_file(path, "image");
  return load_image(path);
}

}  // namespace

void gen_data(const Context& ctx) {
  const Config& c = ctx.config;
  const AnatomyConfig anatomy = anatomy_config(c);
  const CorpusCounts counts{c.get_size("data.prior_count"), c.get_size("data.unsup_a_count"),
                            c.get_size("data.unsup_b_count"), c.get_size("data.test_count")};
  const std::uint64_t seed = c.get_u64("run.seed");
  spdlog::info("generating corpus: prior {} unsupA {} unsupB {} test {} (seed {})",
               counts.prior, counts.unsup_a, counts.unsup_b, counts.test, seed);
  const Corpus corpus = make_corpus(anatomy, modality(c, 'A'), modality(c, 'B'), counts, seed);
  const fs::path dir = ctx.path_key("paths.corpus");
  std::ostringstream manifest;
  manifest << "master_seed = " << seed << "\n"
           << "prior = " << counts.prior << "\nunsupA = " << counts.unsup_a
           << "\nunsupB = " << counts.unsup_b << "\ntest = " << counts.test << "\n\n"
           << c.to_ini();
  write_corpus(dir, corpus, manifest.str());
  c.write(dir / "config.ini");
  spdlog::info("corpus written to {}", dir.string());
}

void train_prior(const Context& ctx) {
  const Config& c = ctx.config;
  const CorpusView corpus = load_corpus(ctx);
  if (corpus.prior.empty()) throw MissingInputError("corpus has no prior split");
  Rng rng = stream_rng(ctx, kPriorStream);
  const PriorTrainingResult result =
      anatprior::train_prior(corpus.prior, architecture(c), c.get_double("model.prob_floor"),
                             training_config(c, "prior.epochs", "prior"), rng);
  const fs::path out = ctx.path_key("paths.prior");
  save_prior(out, result.model);
  result.trace.write_csv(sibling(out, ".trace.csv"));
  c.write(sibling(out, ".config.ini"));
  spdlog::info("prior written to {}", out.string());
}

void pretrain_encoder(const Context& ctx) {
  const Config& c = ctx.config;
  const CorpusView corpus = load_corpus(ctx);
  const char m = modality_letter("pretrain.modality", c.get("pretrain.modality"));
  const std::vector<Image>& images = m == 'A' ? corpus.unsup_a : corpus.unsup_b;
  if (images.empty()) throw MissingInputError(std::string("corpus has no unsup") + m + " split");
  PretrainConfig pc;
  pc.training = training_config(c, "pretrain.epochs", "pretrain");
  pc.recon_sigma = c.get_double("pretrain.recon_sigma");
  Rng rng = stream_rng(ctx, kPretrainStream);
  const PretrainResult result =
      pretrain_image_encoder(images, image_architecture(architecture(c)), pc, rng);
  const fs::path out = ctx.path_key("paths.encoder");
  save_checkpoint(out, encoder_checkpoint(result.encoder));
  result.trace.write_csv(sibling(out, ".trace.csv"));
  c.write(sibling(out, ".config.ini"));
  spdlog::info("pretrained encoder written to {}", out.string());
}

void train_unsup(const Context& ctx) {
  const Config& c = ctx.config;
  const fs::path prior_path = ctx.path_key("paths.prior");
  require_file(prior_path, "prior checkpoint");
  const PriorModel prior = load_prior(prior_path);
  const CorpusView corpus = load_corpus(ctx);
  const char m = modality_letter("unsup.modality", c.get("unsup.modality"));
  const std::vector<Image>& images = m == 'A' ? corpus.unsup_a : corpus.unsup_b;
  if (images.empty()) throw MissingInputError(std::string("corpus has no unsup") + m + " split");

  UnsupervisedConfig uc;
  uc.training = training_config(c, "unsup.epochs", "unsup");
  uc.sigma_mode = parse_sigma_mode(c.get("unsup.sigma_mode"));
  uc.sigma_values = c.get_list("unsup.sigma");
  uc.train_mu = c.get_bool("unsup.train_mu");
  if (!c.get("unsup.encoder_init").empty()) {
    const fs::path init = ctx.path_key("unsup.encoder_init");
    require_file(init, "pretrained encoder checkpoint");
    uc.initial_encoder = load_encoder(init);
  }
  Rng rng = stream_rng(ctx, kUnsupStream);
  const SegmenterTrainingResult result = train_unsupervised(images, prior, uc, rng);
  spdlog::info("sigma {:.5f}, learned mu {}", result.model.appearance.sigma[0], [&] {
    std::string s;
    for (double v : result.model.appearance.mu.value.values()) s += fmt::format("{:.4f} ", v);
    return s;
  }());

  const fs::path out = ctx.path_key("paths.segmenter");
  Checkpoint ckpt = segmenter_to_checkpoint(result.model);
  ckpt.config["train.modality"] = std::string(1, m);
  save_checkpoint(out, ckpt);
  result.trace.write_csv(sibling(out, ".trace.csv"));
  c.write(sibling(out, ".config.ini"));
  spdlog::info("segmenter written to {}", out.string());
}

void segment(const Context& ctx, const SegmentArgs& args) {
  if (args.out.empty()) throw UsageError("--out is required");
  const LoadedSegmenter seg = load_segmenter_for(ctx);
  const Image x = load_input_image(ctx, args.image);
  const SegmentationMap s = map_segment(x, seg.model);
  const fs::path out = ctx.resolve(args.out);
  save_labels(out, s);
  if (!args.pgm.empty()) export_labels(s, ctx.resolve(args.pgm));
  ctx.config.write(sibling(out, ".config.ini"));
}

void sample(const Context& ctx, const SampleArgs& args) {
  if (args.out_dir.empty()) throw UsageError("--out is required");
  const LoadedSegmenter seg = load_segmenter_for(ctx);
  const Image x = load_input_image(ctx, args.image);
  const std::size_t K = args.count.value_or(ctx.config.get_size("inference.samples"));
  Rng rng = stream_rng(ctx, kSampleStream);
  const std::vector<SegmentationMap> maps = sample_segmentations(x, seg.model, K, rng);
  const fs::path dir = ctx.resolve(args.out_dir);
  for (std::size_t k = 0; k < maps.size(); ++k) {
    save_labels(dir / (item_stem(k) + ".seg.vgrd"), maps[k]);
    export_labels(maps[k], dir / (item_stem(k) + ".pgm"));
  }
  ctx.config.write(dir / "config.ini");
}

void uncertainty(const Context& ctx, const UncertaintyArgs& args) {
  if (args.out.empty()) throw UsageError("--out is required");
  const LoadedSegmenter seg = load_segmenter_for(ctx);
  const Image x = load_input_image(ctx, args.image);
  const std::size_t K = args.samples.value_or(ctx.config.get_size("inference.samples"));
  Rng rng = stream_rng(ctx, kUncertaintyStream);
  const UncertaintyMap u = uncertainty_map(x, seg.model, K, rng);
  const fs::path out = ctx.resolve(args.out);
  save_volume(out, u.entropy, VolDtype::f32);
  if (!args.pgm.empty()) {
    export_image(u.entropy, ctx.resolve(args.pgm), 0.0,
                 std::log(static_cast<double>(seg.model.num_labels())));
  }
  ctx.config.write(sibling(out, ".config.ini"));
}

void eval(const Context& ctx) {
  const Config& c = ctx.config;
  const LoadedSegmenter seg = load_segmenter_for(ctx);
  const CorpusView corpus = load_corpus(ctx);
  if (corpus.test.empty()) throw MissingInputError("corpus has no test split");
  const std::string mode = c.get("eval.modality");
  const char m = mode == "auto" ? seg.modality : modality_letter("eval.modality", mode);

  EvalResults results;
  results.methods = {"model", "baseline_locprior"};
  const SegmentationMap baseline = baseline_locprior(seg.model.location);
  for (std::size_t i = 0; i < corpus.test.size(); ++i) {
    const TestItem& t = corpus.test[i];
    const Image& x = m == 'A' ? t.image_a : t.image_b;
    results.items.push_back({item_stem(i), x, t.truth, {map_segment(x, seg.model), baseline}});
  }
  const fs::path dir = ctx.path_key("paths.report");
  ReportOptions opts;
  opts.overlays = c.get_size("eval.overlays");
  const ReportSummary summary = emit_report(results, dir, opts);
  c.write(dir / "config.ini");
  spdlog::info("modality {}: model mean Dice {:.4f}, location-prior baseline {:.4f}", m,
               summary.mean_dice[0], summary.mean_dice[1]);
}

void verify(const Context& ctx, std::ostream& out) {
  const std::uint64_t seed = ctx.config.get_u64("run.seed");
  std::vector<verify::CheckResult> results = verify::gradient_suite(seed);
  results.push_back(verify::adjoint_check(seed));
  results.push_back(verify::kl_exact_check());
  results.push_back(verify::kl_monte_carlo_check(seed));
  results.push_back(verify::jensen_check(seed, 100, 2, 2, 2));
  results.push_back(verify::jensen_check(seed, 50, 3, 3, 3));
  for (double sigma : {0.02, 0.05, 0.1}) results.push_back(verify::noise_check(seed, sigma));
  std::size_t failed = 0;
  for (const verify::CheckResult& r : results) {
    out << verify::format_result(r) << '\n';
    failed += !r.passed;
  }
  out.flush();
  if (failed > 0) {
    throw VerificationError(std::to_string(failed) + " of " + std::to_string(results.size()) +
                            " checks failed");
  }
}

int exit_code_for(std::string_view error_class) {
  if (error_class == "usage") return 2;
  if (error_class == "config") return 3;
  if (error_class == "missing-input") return 4;
  if (error_class == "corrupt-file") return 5;
  if (error_class == "divergence") return 6;
  if (error_class == "dimension") return 7;
  if (error_class == "contract") return 8;
  if (error_class == "io") return 9;
  if (error_class == "verification") return 10;
  return 1;
}

}  // namespace anatprior::cli
