#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

#include "CLI11.hpp"
#include "anatprior/cli/commands.hpp"

namespace {

using anatprior::cli::Context;

// Failures end with exactly one line on stderr:
//   error class=<token> message=<text>
int fail(std::string_view error_class, const std::string& message) {
  std::cerr << "error class=" << error_class << " message=" << message << std::endl;
  return anatprior::cli::exit_code_for(error_class);
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_logger_st("anatprior");
  logger->set_pattern("[%H:%M:%S] %v");
  spdlog::set_default_logger(logger);

  CLI::App app{"Generative segmentation with an auto-encoding anatomical prior"};
  app.require_subcommand(1);
  std::string workdir = ".", config_file, log_level = "info";
  std::vector<std::string> assignments;
  std::optional<std::uint64_t> seed;
  app.add_option("--workdir", workdir, "directory all relative paths are resolved against");
  app.add_option("--config", config_file, "INI config file (relative to the workdir)");
  app.add_option("--seed", seed, "master seed (overrides run.seed)");
  app.add_option("--set", assignments, "override a config key: section.key=value");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  auto* gen = app.add_subcommand("gen-data", "generate the synthetic corpus");
  auto* prior = app.add_subcommand("train-prior", "train the anatomical prior");
  auto* pre = app.add_subcommand("pretrain-encoder", "pretrain the image encoder (image VAE)");
  auto* unsup = app.add_subcommand("train-unsup", "train the unsupervised segmenter");

  anatprior::cli::SegmentArgs seg_args;
  auto* seg = app.add_subcommand("segment", "MAP segmentation of one image");
  seg->add_option("--image", seg_args.image, "input image (.vgrd)")->required();
  seg->add_option("--out", seg_args.out, "output label volume (.vgrd)")->required();
  seg->add_option("--pgm", seg_args.pgm, "also export a greyscale PGM");

  anatprior::cli::SampleArgs sample_args;
  auto* smp = app.add_subcommand("sample", "draw plausible segmentations of one image");
  smp->add_option("--image", sample_args.image, "input image (.vgrd)")->required();
  smp->add_option("--out", sample_args.out_dir, "output directory")->required();
  smp->add_option("--count", sample_args.count, "number of samples");

  anatprior::cli::UncertaintyArgs unc_args;
  auto* unc = app.add_subcommand("uncertainty", "voxel-wise entropy map of one image");
  unc->add_option("--image", unc_args.image, "input image (.vgrd)")->required();
  unc->add_option("--out", unc_args.out, "output entropy volume (.vgrd, f32)")->required();
  unc->add_option("--pgm", unc_args.pgm, "also export a greyscale PGM");
  unc->add_option("--samples", unc_args.samples, "latent samples");

  auto* ev = app.add_subcommand("eval", "Dice report on the test split");
  auto* ver = app.add_subcommand("verify", "run the oracle and property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    spdlog::set_level(spdlog::level::from_str(log_level));
    Context ctx;
    ctx.workdir = workdir;
    if (!config_file.empty()) ctx.config.load_file(ctx.resolve(config_file));
    for (const std::string& a : assignments) ctx.config.set_assignment(a);
    if (seed) ctx.config.set("run.seed", std::to_string(*seed));

    if (*gen) anatprior::cli::gen_data(ctx);
    else if (*prior) anatprior::cli::train_prior(ctx);
    else if (*pre) anatprior::cli::pretrain_encoder(ctx);
    else if (*unsup) anatprior::cli::train_unsup(ctx);
    else if (*seg) anatprior::cli::segment(ctx, seg_args);
    else if (*smp) anatprior::cli::sample(ctx, sample_args);
    else if (*unc) anatprior::cli::uncertainty(ctx, unc_args);
    else if (*ev) anatprior::cli::eval(ctx);
    else if (*ver) anatprior::cli::verify(ctx, std::cout);
  } catch (const anatprior::Error& e) {
    return fail(e.error_class(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
