#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "anatprior/autodiff/grid.hpp"
#include "anatprior/prior/network.hpp"

namespace anatprior {

// Model checkpoint container, little-endian:
//   "APCK" | version u16 | kind string |
//   config: u32 count, (key string, value string) x count |
//   manifest: u32 count, (name string, ndim u16, dims u32 x ndim) x count,
//             payload CRC32 u32 |
//   payload: f32 values of every tensor in manifest order |
//   CRC32 u32 of every preceding byte.
// Strings are u32 length + bytes.
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string kind;
  std::map<std::string, std::string> config;
  std::vector<std::pair<std::string, Grid>> tensors;

  const Grid& tensor(const std::string& name) const;
  const std::string& value(const std::string& key) const;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// MissingInputError if absent, CorruptFileError if damaged.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Architecture keys under `prefix`.
void put_architecture(Checkpoint& ckpt, const std::string& prefix,
                      const ArchitectureConfig& arch);
ArchitectureConfig get_architecture(const Checkpoint& ckpt, const std::string& prefix);

void put_parameters(Checkpoint& ckpt, const std::string& prefix,
                    const ConstNamedParameters& params);
// Copies tensors named prefix + parameter name into `params`; shapes must
// match exactly.
void get_parameters(const Checkpoint& ckpt, const std::string& prefix,
                    const NamedParameters& params);

double parse_double(const std::string& text, const std::string& what);
std::size_t parse_size(const std::string& text, const std::string& what);
std::string format_double(double v);

}  // namespace anatprior
