#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace anatprior {

// Base of every error raised by the library. error_class() is a stable,
// machine-parseable token that the command line tool prints on failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view error_class() const noexcept = 0;
};

#define ANATPRIOR_DEFINE_ERROR(Name, token)                               \
  class Name : public Error {                                             \
   public:                                                                \
    using Error::Error;                                                   \
    std::string_view error_class() const noexcept override { return token; } \
  }

ANATPRIOR_DEFINE_ERROR(DimensionError, "dimension");
ANATPRIOR_DEFINE_ERROR(ContractError, "contract");
ANATPRIOR_DEFINE_ERROR(ConfigError, "config");
ANATPRIOR_DEFINE_ERROR(CorruptFileError, "corrupt-file");
ANATPRIOR_DEFINE_ERROR(MissingInputError, "missing-input");
ANATPRIOR_DEFINE_ERROR(DivergenceError, "divergence");
ANATPRIOR_DEFINE_ERROR(IoError, "io");

#undef ANATPRIOR_DEFINE_ERROR

}  // namespace anatprior
