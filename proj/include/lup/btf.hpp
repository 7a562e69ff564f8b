#pragma once

// BTF1 binary tensor frames:
//
//   offset 0  "BTF1"                 magic
//   offset 4  u8 dtype               0x01 = float32
//   offset 5  u8 ndim
//   offset 6  ndim x u32 LE          dims
//   then      prod(dims) x f32 LE    row-major payload
//
// The same frame is used on the oracle wire and for tensor files on disk.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lup/tensor.hpp"

namespace lup::btf {

inline constexpr std::uint8_t kDtypeF32 = 0x01;

struct Frame {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

std::vector<std::uint8_t> encode(std::span<const std::uint32_t> dims, std::span<const float> data);
std::vector<std::uint8_t> encode(const ImageTensor& tensor);

/// Parses a whole frame; trailing or missing bytes are MalformedFrame.
Frame decode_frame(std::span<const std::uint8_t> bytes);

/// Decodes a 3-d frame into an image tensor carrying `range`.
ImageTensor decode(std::span<const std::uint8_t> bytes, ValueRange range = {});

void write_file(const std::filesystem::path& path, const ImageTensor& tensor);
ImageTensor read_file(const std::filesystem::path& path, ValueRange range = {});

}  // namespace lup::btf
