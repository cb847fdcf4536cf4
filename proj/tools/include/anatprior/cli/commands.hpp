#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "anatprior/cli/config.hpp"
#include "anatprior/errors.hpp"

namespace anatprior::cli {

// Bad command line usage.
class UsageError : public Error {
 public:
  using Error::Error;
  std::string_view error_class() const noexcept override { return "usage"; }
};

// A verification check failed.
class VerificationError : public Error {
 public:
  using Error::Error;
  std::string_view error_class() const noexcept override { return "verification"; }
};

struct Context {
  std::filesystem::path workdir = ".";
  Config config;

  // Relative paths are taken from the workdir.
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::filesystem::path path_key(const std::string& key) const;
};

void gen_data(const Context& ctx);
void train_prior(const Context& ctx);
void pretrain_encoder(const Context& ctx);
void train_unsup(const Context& ctx);

struct SegmentArgs {
  std::string image;
  std::string out;
  std::string pgm;  // optional greyscale export
};
void segment(const Context& ctx, const SegmentArgs& args);

struct SampleArgs {
  std::string image;
  std::string out_dir;
  std::optional<std::size_t> count;  // defaults to inference.samples
};
void sample(const Context& ctx, const SampleArgs& args);

struct UncertaintyArgs {
  std::string image;
  std::string out;
  std::string pgm;
  std::optional<std::size_t> samples;
};
void uncertainty(const Context& ctx, const UncertaintyArgs& args);

void eval(const Context& ctx);

// Prints one PASS/FAIL line per check to `out`; throws VerificationError if
// any failed.
void verify(const Context& ctx, std::ostream& out);

// Exit status for an error class.
int exit_code_for(std::string_view error_class);

}  // namespace anatprior::cli
