#include "anatprior/synthdata/volgrid.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "anatprior/bytes.hpp"
#include "anatprior/errors.hpp"

namespace anatprior {

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(
      crc32(crc, bytes.data(), static_cast<uInt>(bytes.size())));
}

std::vector<std::uint8_t> encode_volume(const Grid& grid, VolDtype dtype) {
  ByteWriter w;
  w.put_bytes(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>("VGRD"), 4));
  w.put<std::uint16_t>(kVolGridVersion);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(grid.rank()));
  for (std::size_t d : grid.shape()) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(dtype));
  switch (dtype) {
    case VolDtype::u8:
      for (double v : grid.values()) {
        if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v)) {
          throw ContractError("u8 volumes hold integers in [0, 255]");
        }
        w.put<std::uint8_t>(static_cast<std::uint8_t>(v));
      }
      break;
    case VolDtype::f32:
      for (double v : grid.values()) w.put<float>(static_cast<float>(v));
      break;
    default:
      throw ContractError("unknown volume dtype");
  }
  w.put<std::uint32_t>(crc32_of(w.bytes()));
  return std::move(w.bytes());
}

Grid decode_volume(std::span<const std::uint8_t> bytes, VolDtype* dtype_out) {
  if (bytes.size() < 4 + 2 + 2 + 1 + 4) throw CorruptFileError("volume too short");
  const auto body = bytes.first(bytes.size() - 4);
  ByteReader trailer(bytes.last(4));
  if (trailer.get<std::uint32_t>() != crc32_of(body)) {
    throw CorruptFileError("volume CRC mismatch");
  }
  ByteReader r(body);
  const auto magic = r.get_bytes(4);
  if (!std::equal(magic.begin(), magic.end(), "VGRD")) {
    throw CorruptFileError("bad volume magic");
  }
  if (r.get<std::uint16_t>() != kVolGridVersion) {
    throw CorruptFileError("unsupported volume version");
  }
  const auto ndim = r.get<std::uint16_t>();
  Shape shape(ndim);
  for (auto& d : shape) d = r.get<std::uint32_t>();
  const auto dtype = static_cast<VolDtype>(r.get<std::uint8_t>());
  const std::size_t n = shape_size(shape);
  Grid g(shape);
  switch (dtype) {
    case VolDtype::u8:
      if (r.remaining() != n) throw CorruptFileError("volume payload length");
      for (std::size_t i = 0; i < n; ++i) g[i] = r.get<std::uint8_t>();
      break;
    case VolDtype::f32:
      if (r.remaining() != n * sizeof(float)) {
        throw CorruptFileError("volume payload length");
      }
      for (std::size_t i = 0; i < n; ++i) g[i] = r.get<float>();
      break;
    default:
      throw CorruptFileError("unknown volume dtype");
  }
  if (dtype_out) *dtype_out = dtype;
  return g;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

void save_volume(const std::filesystem::path& path, const Grid& grid, VolDtype dtype) {
  write_file(path, encode_volume(grid, dtype));
}

Grid load_volume(const std::filesystem::path& path, VolDtype* dtype) {
  const auto bytes = read_file(path);
  try {
    return decode_volume(bytes, dtype);
  } catch (const CorruptFileError& e) {
    throw CorruptFileError(path.string() + ": " + e.what());
  }
}

void save_labels(const std::filesystem::path& path, const SegmentationMap& s) {
  save_volume(path, s.label_grid(), VolDtype::u8);
}

SegmentationMap load_labels(const std::filesystem::path& path, std::size_t num_labels) {
  VolDtype dtype{};
  const Grid g = load_volume(path, &dtype);
  if (dtype != VolDtype::u8 || g.rank() != 2) {
    throw CorruptFileError(path.string() + ": not a 2D u8 label volume");
  }
  std::vector<std::uint8_t> labels(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    labels[i] = static_cast<std::uint8_t>(g[i]);
  }
  try {
    return SegmentationMap(g.dim(0), g.dim(1), num_labels, std::move(labels));
  } catch (const ContractError& e) {
    throw CorruptFileError(path.string() + ": " + e.what());
  }
}

void save_image(const std::filesystem::path& path, const Image& img) {
  save_volume(path, img.pixels, VolDtype::f32);
}

Image load_image(const std::filesystem::path& path) {
  VolDtype dtype{};
  Grid g = load_volume(path, &dtype);
  if (dtype != VolDtype::f32 || g.rank() != 2) {
    throw CorruptFileError(path.string() + ": not a 2D f32 image volume");
  }
  return Image(std::move(g));
}

namespace {
void write_pgm(const std::filesystem::path& path, std::size_t H, std::size_t W,
               const std::vector<std::uint8_t>& grey) {
  std::string header = "P5\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), grey.begin(), grey.end());
  write_file(path, bytes);
}
}  // namespace

void export_image(const Grid& grid, const std::filesystem::path& path, double lo,
                  double hi) {
  if (grid.rank() != 2) throw DimensionError("export_image expects a 2D grid");
  if (!(hi > lo)) throw ContractError("export_image needs hi > lo");
  std::vector<std::uint8_t> grey(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = std::clamp((grid[i] - lo) / (hi - lo), 0.0, 1.0);
    grey[i] = static_cast<std::uint8_t>(std::lround(255.0 * t));
  }
  write_pgm(path, grid.dim(0), grid.dim(1), grey);
}

void export_labels(const SegmentationMap& s, const std::filesystem::path& path) {
  std::vector<std::uint8_t> grey(s.size());
  const double step = 255.0 / static_cast<double>(s.num_labels() - 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    grey[i] = static_cast<std::uint8_t>(std::lround(step * s[i]));
  }
  write_pgm(path, s.height(), s.width(), grey);
}

}  // namespace anatprior
