#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lup/error.hpp"

namespace lup {

struct Dims {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return channels * height * width; }
  bool operator==(const Dims&) const = default;
  std::string to_string() const;
};

/// Closed interval of valid pixel values.
struct ValueRange {
  double lo = -1.0;
  double hi = 1.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  bool operator==(const ValueRange&) const = default;
};

/// Dense (channels, height, width) image stored row-major as 32-bit floats.
///
/// Construction validates that the payload matches the dims, that every element is
/// finite, and that the value range is non-empty. In-place arithmetic does not
/// re-validate; call all_finite() where that matters.
class ImageTensor {
 public:
  ImageTensor() = default;
  explicit ImageTensor(Dims dims, ValueRange range = {});
  ImageTensor(Dims dims, std::vector<float> data, ValueRange range = {});

  static ImageTensor filled(Dims dims, float value, ValueRange range = {});

  const Dims& dims() const { return dims_; }
  const ValueRange& range() const { return range_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  const std::vector<float>& values() const { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }
  float& at(std::size_t c, std::size_t h, std::size_t w);
  float at(std::size_t c, std::size_t h, std::size_t w) const;

  /// this += alpha * other.
  ImageTensor& add_scaled(float alpha, const ImageTensor& other);
  ImageTensor& operator+=(const ImageTensor& other) { return add_scaled(1.0f, other); }
  ImageTensor& operator-=(const ImageTensor& other) { return add_scaled(-1.0f, other); }
  ImageTensor& operator*=(float s);

  bool all_finite() const;
  bool same_shape(const ImageTensor& other) const { return dims_ == other.dims_; }
  bool operator==(const ImageTensor& other) const {
    return dims_ == other.dims_ && data_ == other.data_;
  }

 private:
  Dims dims_{};
  ValueRange range_{};
  std::vector<float> data_;
};

ImageTensor operator+(ImageTensor a, const ImageTensor& b);
ImageTensor operator-(ImageTensor a, const ImageTensor& b);
ImageTensor operator*(float s, ImageTensor a);

/// Throws ShapeError unless both tensors have identical dims.
void require_same_dims(const ImageTensor& a, const ImageTensor& b, const char* what);

/// Clamp every element into the tensor's value range.
ImageTensor clip_to_range(const ImageTensor& x);
ImageTensor clip_to_range(const ImageTensor& x, ValueRange range);

}  // namespace lup
