#include "anatprior/prior/checkpoint.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "anatprior/bytes.hpp"
#include "anatprior/errors.hpp"
#include "anatprior/synthdata/volgrid.hpp"

namespace anatprior {

const Grid& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, g] : tensors) {
    if (n == name) return g;
  }
  throw CorruptFileError("checkpoint has no tensor '" + name + "'");
}

const std::string& Checkpoint::value(const std::string& key) const {
  auto it = config.find(key);
  if (it == config.end()) throw CorruptFileError("checkpoint has no key '" + key + "'");
  return it->second;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  ByteWriter payload;
  for (const auto& [name, g] : ckpt.tensors) {
    for (double v : g.values()) payload.put<float>(static_cast<float>(v));
  }
  ByteWriter w;
  w.put_bytes(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>("APCK"), 4));
  w.put<std::uint16_t>(kCheckpointVersion);
  w.put_string(ckpt.kind);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.config.size()));
  for (const auto& [k, v] : ckpt.config) {
    w.put_string(k);
    w.put_string(v);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, g] : ckpt.tensors) {
    w.put_string(name);
    w.put<std::uint16_t>(static_cast<std::uint16_t>(g.rank()));
    for (std::size_t d : g.shape()) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  }
  w.put<std::uint32_t>(crc32_of(payload.bytes()));
  w.put_bytes(payload.bytes());
  w.put<std::uint32_t>(crc32_of(w.bytes()));
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 + 2 + 4) throw CorruptFileError("checkpoint too short");
  const auto body = bytes.first(bytes.size() - 4);
  if (ByteReader(bytes.last(4)).get<std::uint32_t>() != crc32_of(body)) {
    throw CorruptFileError("checkpoint CRC mismatch");
  }
  ByteReader r(body);
  const auto magic = r.get_bytes(4);
  if (!std::equal(magic.begin(), magic.end(), "APCK")) {
    throw CorruptFileError("bad checkpoint magic");
  }
  if (r.get<std::uint16_t>() != kCheckpointVersion) {
    throw CorruptFileError("unsupported checkpoint version");
  }
  Checkpoint ckpt;
  ckpt.kind = r.get_string();
  const auto n_config = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_config; ++i) {
    std::string k = r.get_string();
    ckpt.config[k] = r.get_string();
  }
  const auto n_tensors = r.get<std::uint32_t>();
  std::vector<std::pair<std::string, Shape>> manifest;
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.get_string();
    Shape shape(r.get<std::uint16_t>());
    for (auto& d : shape) d = r.get<std::uint32_t>();
    manifest.emplace_back(std::move(name), std::move(shape));
  }
  const auto payload_crc = r.get<std::uint32_t>();
  std::size_t total = 0;
  for (const auto& [name, shape] : manifest) total += shape_size(shape);
  if (r.remaining() != total * sizeof(float)) {
    throw CorruptFileError("checkpoint payload length does not match manifest");
  }
  ByteReader payload(r.get_bytes(total * sizeof(float)));
  if (crc32_of(body.last(total * sizeof(float))) != payload_crc) {
    throw CorruptFileError("checkpoint payload checksum mismatch");
  }
  for (auto& [name, shape] : manifest) {
    Grid g(shape);
    for (double& v : g.values()) v = payload.get<float>();
    ckpt.tensors.emplace_back(std::move(name), std::move(g));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInputError("checkpoint " + path.string() + " not found");
  }
  try {
    return decode_checkpoint(read_file(path));
  } catch (const CorruptFileError& e) {
    throw CorruptFileError(path.string() + ": " + e.what());
  }
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(what + ": '" + text + "' is not a number");
  }
  return v;
}

std::size_t parse_size(const std::string& text, const std::string& what) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(what + ": '" + text + "' is not a non-negative integer");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void put_architecture(Checkpoint& ckpt, const std::string& prefix,
                      const ArchitectureConfig& a) {
  ckpt.config[prefix + "height"] = std::to_string(a.height);
  ckpt.config[prefix + "width"] = std::to_string(a.width);
  ckpt.config[prefix + "channels"] = std::to_string(a.channels);
  ckpt.config[prefix + "levels"] = std::to_string(a.levels);
  ckpt.config[prefix + "features"] = std::to_string(a.features);
  ckpt.config[prefix + "kernel"] = std::to_string(a.kernel);
  ckpt.config[prefix + "latent_dim"] = std::to_string(a.latent_dim);
  ckpt.config[prefix + "alpha"] = format_double(a.alpha);
}

ArchitectureConfig get_architecture(const Checkpoint& ckpt, const std::string& prefix) {
  auto sz = [&](const char* k) {
    return parse_size(ckpt.value(prefix + k), prefix + k);
  };
  ArchitectureConfig a;
  a.height = sz("height");
  a.width = sz("width");
  a.channels = sz("channels");
  a.levels = sz("levels");
  a.features = sz("features");
  a.kernel = sz("kernel");
  a.latent_dim = sz("latent_dim");
  a.alpha = parse_double(ckpt.value(prefix + "alpha"), prefix + "alpha");
  try {
    a.validate();
  } catch (const ConfigError& e) {
    throw CorruptFileError(std::string("checkpoint architecture: ") + e.what());
  }
  return a;
}

void put_parameters(Checkpoint& ckpt, const std::string& prefix,
                    const ConstNamedParameters& params) {
  for (const auto& [name, p] : params) ckpt.tensors.emplace_back(prefix + name, p->value);
}

void get_parameters(const Checkpoint& ckpt, const std::string& prefix,
                    const NamedParameters& params) {
  for (const auto& [name, p] : params) {
    const Grid& g = ckpt.tensor(prefix + name);
    if (g.shape() != p->value.shape()) {
      throw CorruptFileError("checkpoint tensor " + prefix + name + " has shape " +
                             shape_to_string(g.shape()) + ", model expects " +
                             shape_to_string(p->value.shape()));
    }
    p->value = g;
    p->grad = Grid(g.shape());
  }
}

}  // namespace anatprior
