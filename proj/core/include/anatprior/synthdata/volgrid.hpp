#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "anatprior/autodiff/grid.hpp"
#include "anatprior/prior/segmentation.hpp"
#include "anatprior/synthdata/image.hpp"

namespace anatprior {

// VGRD container, all integers little-endian:
//   "VGRD" | version u16 | ndim u16 | dims u32 x ndim | dtype u8 |
//   payload (row-major) | CRC32 u32 of every preceding byte.
enum class VolDtype : std::uint8_t { u8 = 1, f32 = 2 };

inline constexpr std::uint16_t kVolGridVersion = 1;

std::vector<std::uint8_t> encode_volume(const Grid& grid, VolDtype dtype);
// Throws CorruptFileError on bad magic, version, length or CRC.
Grid decode_volume(std::span<const std::uint8_t> bytes, VolDtype* dtype = nullptr);

void save_volume(const std::filesystem::path& path, const Grid& grid, VolDtype dtype);
Grid load_volume(const std::filesystem::path& path, VolDtype* dtype = nullptr);

void save_labels(const std::filesystem::path& path, const SegmentationMap& s);
SegmentationMap load_labels(const std::filesystem::path& path, std::size_t num_labels);

void save_image(const std::filesystem::path& path, const Image& img);
Image load_image(const std::filesystem::path& path);

// Binary PGM (P5) of a 2D grid, values mapped linearly from [lo, hi] to
// [0, 255] and clamped.
void export_image(const Grid& grid, const std::filesystem::path& path,
                  double lo = 0.0, double hi = 1.0);
// Label l maps to round(255 * l / (L - 1)): L distinct grey levels.
void export_labels(const SegmentationMap& s, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace anatprior
