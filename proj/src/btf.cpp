#include "lup/btf.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace lup::btf {
namespace {

constexpr std::uint8_t kMagic[4] = {'B', 'T', 'F', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> encode(std::span<const std::uint32_t> dims, std::span<const float> data) {
  if (dims.size() > 255) throw ShapeError("BTF1 supports at most 255 dimensions");
  std::uint64_t count = 1;
  for (auto d : dims) count *= d;
  if (count != data.size()) throw ShapeError("BTF1 payload size does not match dims");

  std::vector<std::uint8_t> out;
  out.reserve(6 + 4 * dims.size() + 4 * data.size());
  for (auto b : kMagic) out.push_back(b);
  out.push_back(kDtypeF32);
  out.push_back(static_cast<std::uint8_t>(dims.size()));
  for (auto d : dims) put_u32(out, d);
  for (float v : data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

std::vector<std::uint8_t> encode(const ImageTensor& tensor) {
  const std::uint32_t dims[3] = {static_cast<std::uint32_t>(tensor.dims().channels),
                                 static_cast<std::uint32_t>(tensor.dims().height),
                                 static_cast<std::uint32_t>(tensor.dims().width)};
  return encode(dims, tensor.data());
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6) throw MalformedFrame("BTF1 frame shorter than its header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw MalformedFrame("bad BTF1 magic");
  if (bytes[4] != kDtypeF32) {
    throw MalformedFrame("unsupported BTF1 dtype code " + std::to_string(bytes[4]));
  }
  const std::size_t ndim = bytes[5];
  const std::size_t header = 6 + 4 * ndim;
  if (bytes.size() < header) throw MalformedFrame("BTF1 frame truncated inside dims");

  Frame frame;
  frame.dims.reserve(ndim);
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    frame.dims.push_back(get_u32(bytes.data() + 6 + 4 * i));
    count *= frame.dims.back();
  }
  if (count > (bytes.size() - header) / 4 || bytes.size() - header != 4 * count) {
    throw MalformedFrame("BTF1 payload is " + std::to_string(bytes.size() - header) +
                         " bytes, expected " + std::to_string(4 * count));
  }
  frame.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    frame.data[i] = std::bit_cast<float>(get_u32(bytes.data() + header + 4 * i));
  }
  return frame;
}

ImageTensor decode(std::span<const std::uint8_t> bytes, ValueRange range) {
  Frame frame = decode_frame(bytes);
  if (frame.dims.size() != 3) {
    throw MalformedFrame("expected a 3-d image frame, got " + std::to_string(frame.dims.size()) +
                         " dims");
  }
  try {
    return ImageTensor(Dims{frame.dims[0], frame.dims[1], frame.dims[2]}, std::move(frame.data),
                       range);
  } catch (const ShapeError& e) {
    throw MalformedFrame(std::string("invalid image frame: ") + e.what());
  }
}

void write_file(const std::filesystem::path& path, const ImageTensor& tensor) {
  const auto bytes = encode(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

ImageTensor read_file(const std::filesystem::path& path, ValueRange range) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode(bytes, range);
}

}  // namespace lup::btf
