#include "lup/tensor.hpp"

#include <cmath>

#include "lup/kernels.hpp"

namespace lup {

std::string Dims::to_string() const {
  return "(" + std::to_string(channels) + "," + std::to_string(height) + "," +
         std::to_string(width) + ")";
}

namespace {

void validate_header(const Dims& dims, const ValueRange& range) {
  if (dims.channels == 0 || dims.height == 0 || dims.width == 0) {
    throw ShapeError("tensor dims must be positive, got " + dims.to_string());
  }
  if (!(range.lo < range.hi) || !std::isfinite(range.lo) || !std::isfinite(range.hi)) {
    throw ConfigError("value range must satisfy lo < hi");
  }
}

}  // namespace

ImageTensor::ImageTensor(Dims dims, ValueRange range)
    : dims_(dims), range_(range), data_(dims.size(), 0.0f) {
  validate_header(dims_, range_);
}

ImageTensor::ImageTensor(Dims dims, std::vector<float> data, ValueRange range)
    : dims_(dims), range_(range), data_(std::move(data)) {
  validate_header(dims_, range_);
  if (data_.size() != dims_.size()) {
    throw ShapeError("payload of " + std::to_string(data_.size()) +
                     " elements does not match dims " + dims_.to_string());
  }
  if (!all_finite()) {
    throw ShapeError("tensor payload contains non-finite values");
  }
}

ImageTensor ImageTensor::filled(Dims dims, float value, ValueRange range) {
  return ImageTensor(dims, std::vector<float>(dims.size(), value), range);
}

float& ImageTensor::at(std::size_t c, std::size_t h, std::size_t w) {
  return data_[(c * dims_.height + h) * dims_.width + w];
}

float ImageTensor::at(std::size_t c, std::size_t h, std::size_t w) const {
  return data_[(c * dims_.height + h) * dims_.width + w];
}

ImageTensor& ImageTensor::add_scaled(float alpha, const ImageTensor& other) {
  require_same_dims(*this, other, "add_scaled");
  kernels::axpy(alpha, other.data(), data());
  return *this;
}

ImageTensor& ImageTensor::operator*=(float s) {
  kernels::scale(s, data());
  return *this;
}

bool ImageTensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ImageTensor operator+(ImageTensor a, const ImageTensor& b) { return a += b; }
ImageTensor operator-(ImageTensor a, const ImageTensor& b) { return a -= b; }
ImageTensor operator*(float s, ImageTensor a) { return a *= s; }

void require_same_dims(const ImageTensor& a, const ImageTensor& b, const char* what) {
  if (a.dims() != b.dims()) {
    throw ShapeError(std::string(what) + ": dims " + a.dims().to_string() + " vs " +
                     b.dims().to_string());
  }
}

ImageTensor clip_to_range(const ImageTensor& x) { return clip_to_range(x, x.range()); }

ImageTensor clip_to_range(const ImageTensor& x, ValueRange range) {
  ImageTensor out = x;
  kernels::clamp(static_cast<float>(range.lo), static_cast<float>(range.hi), out.data());
  return out;
}

}  // namespace lup
