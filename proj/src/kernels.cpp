#include "lup/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace lup::kernels {
namespace {

template <class Partial>
double blocked_sum(std::size_t n, Partial&& partial) {
  const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;
  if (blocks <= 1) return partial(0, n);
  std::vector<double> parts(blocks, 0.0);
  const auto nb = static_cast<std::int64_t>(blocks);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::int64_t b = 0; b < nb; ++b) {
    const auto begin = static_cast<std::size_t>(b) * kBlockSize;
    parts[static_cast<std::size_t>(b)] = partial(begin, std::min(n, begin + kBlockSize));
  }
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

// Symmetric (rows x rows) output of pairwise row dot products; fills both triangles.
template <class RowDot>
std::vector<double> symmetric_pairs(std::size_t n, RowDot&& row_dot, bool parallel) {
  std::vector<double> out(n * n, 0.0);
  const auto nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::int64_t i = 0; i < nn; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j <= ui; ++j) {
      const double v = row_dot(ui, j);
      out[ui * n + j] = v;
      out[j * n + ui] = v;
    }
  }
  return out;
}

}  // namespace

double sum_squared_diff(std::span<const float> a, std::span<const float> b) {
  return blocked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
      s += d * d;
    }
    return s;
  });
}

double sum_abs_diff(std::span<const float> a, std::span<const float> b) {
  return blocked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      s += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    }
    return s;
  });
}

double sum_squares(std::span<const float> a) {
  return blocked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += static_cast<double>(a[i]) * a[i];
    return s;
  });
}

double max_abs(std::span<const float> a) {
  double m = 0.0;
  const auto n = static_cast<std::int64_t>(a.size());
#pragma omp parallel for reduction(max : m) schedule(static) if (a.size() >= kParallelThreshold)
  for (std::int64_t i = 0; i < n; ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[static_cast<std::size_t>(i)])));
  }
  return m;
}

double dot(std::span<const float> a, std::span<const float> b) {
  return blocked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
  });
}

double dot(std::span<const double> a, std::span<const double> b) {
  return blocked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    return s;
  });
}

void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  const float* xs = x.data();
  float* ys = y.data();
  const auto n = static_cast<std::int64_t>(y.size());
  if (y.size() < kParallelThreshold) {
    for (std::int64_t i = 0; i < n; ++i) ys[i] += alpha * xs[i];
    return;
  }
#pragma omp parallel for simd schedule(static)
  for (std::int64_t i = 0; i < n; ++i) ys[i] += alpha * xs[i];
}

void scale(float s, std::span<float> y) {
  float* ys = y.data();
  const auto n = static_cast<std::int64_t>(y.size());
  if (y.size() < kParallelThreshold) {
    for (std::int64_t i = 0; i < n; ++i) ys[i] *= s;
    return;
  }
#pragma omp parallel for simd schedule(static)
  for (std::int64_t i = 0; i < n; ++i) ys[i] *= s;
}

void clamp(float lo, float hi, std::span<float> y) {
  float* ys = y.data();
  const auto n = static_cast<std::int64_t>(y.size());
  if (y.size() < kParallelThreshold) {
    for (std::int64_t i = 0; i < n; ++i) ys[i] = std::clamp(ys[i], lo, hi);
    return;
  }
#pragma omp parallel for simd schedule(static)
  for (std::int64_t i = 0; i < n; ++i) ys[i] = std::clamp(ys[i], lo, hi);
}

std::vector<double> gram(std::span<const double> matrix, std::size_t rows, std::size_t cols) {
  const bool parallel = rows * rows * cols >= kParallelThreshold;
  return symmetric_pairs(
      rows,
      [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        const double* ri = matrix.data() + i * cols;
        const double* rj = matrix.data() + j * cols;
        for (std::size_t k = 0; k < cols; ++k) s += ri[k] * rj[k];
        return s;
      },
      parallel);
}

std::vector<double> cross_product(std::span<const double> matrix, std::size_t rows,
                                  std::size_t cols) {
  const bool parallel = rows * cols * cols >= kParallelThreshold;
  return symmetric_pairs(
      cols,
      [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (std::size_t r = 0; r < rows; ++r) s += matrix[r * cols + i] * matrix[r * cols + j];
        return s;
      },
      parallel);
}

namespace {

double blur_tap(std::span<const double> line, std::size_t stride, std::size_t len,
                std::size_t pos, std::span<const double> kernel) {
  const auto half = static_cast<std::int64_t>(kernel.size() / 2);
  double s = 0.0;
  for (std::size_t t = 0; t < kernel.size(); ++t) {
    auto idx = static_cast<std::int64_t>(pos) + static_cast<std::int64_t>(t) - half;
    idx = std::clamp<std::int64_t>(idx, 0, static_cast<std::int64_t>(len) - 1);
    s += kernel[t] * line[static_cast<std::size_t>(idx) * stride];
  }
  return s;
}

}  // namespace

void separable_blur(std::span<const double> plane, std::size_t height, std::size_t width,
                    std::span<const double> kernel, std::span<double> out) {
  std::vector<double> tmp(height * width);
  const bool parallel = height * width * kernel.size() >= kParallelThreshold;
  const auto h = static_cast<std::int64_t>(height);
  const auto w = static_cast<std::int64_t>(width);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t r = 0; r < h; ++r) {
    const auto row = plane.subspan(static_cast<std::size_t>(r) * width, width);
    for (std::size_t c = 0; c < width; ++c) {
      tmp[static_cast<std::size_t>(r) * width + c] = blur_tap(row, 1, width, c, kernel);
    }
  }
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t c = 0; c < w; ++c) {
    const auto col = std::span<const double>(tmp).subspan(static_cast<std::size_t>(c));
    for (std::size_t r = 0; r < height; ++r) {
      out[r * width + static_cast<std::size_t>(c)] = blur_tap(col, width, height, r, kernel);
    }
  }
}

namespace reference {

double sum_squared_diff(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return s;
}

double sum_abs_diff(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  }
  return s;
}

double sum_squares(std::span<const float> a) {
  double s = 0.0;
  for (float v : a) s += static_cast<double>(v) * v;
  return s;
}

double max_abs(std::span<const float> a) {
  double m = 0.0;
  for (float v : a) m = std::max(m, std::abs(static_cast<double>(v)));
  return m;
}

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

void clamp(float lo, float hi, std::span<float> y) {
  for (auto& v : y) v = std::clamp(v, lo, hi);
}

std::vector<double> gram(std::span<const double> matrix, std::size_t rows, std::size_t cols) {
  std::vector<double> out(rows * rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < rows; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < cols; ++k) s += matrix[i * cols + k] * matrix[j * cols + k];
      out[i * rows + j] = s;
    }
  }
  return out;
}

std::vector<double> cross_product(std::span<const double> matrix, std::size_t rows,
                                  std::size_t cols) {
  std::vector<double> out(cols * cols, 0.0);
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < rows; ++r) s += matrix[r * cols + i] * matrix[r * cols + j];
      out[i * cols + j] = s;
    }
  }
  return out;
}

void separable_blur(std::span<const double> plane, std::size_t height, std::size_t width,
                    std::span<const double> kernel, std::span<double> out) {
  const auto half = static_cast<std::int64_t>(kernel.size() / 2);
  auto clamp_idx = [](std::int64_t v, std::size_t len) {
    return static_cast<std::size_t>(std::clamp<std::int64_t>(v, 0, static_cast<std::int64_t>(len) - 1));
  };
  std::vector<double> tmp(height * width, 0.0);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      double s = 0.0;
      for (std::size_t t = 0; t < kernel.size(); ++t) {
        const auto cc = clamp_idx(static_cast<std::int64_t>(c + t) - half, width);
        s += kernel[t] * plane[r * width + cc];
      }
      tmp[r * width + c] = s;
    }
  }
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      double s = 0.0;
      for (std::size_t t = 0; t < kernel.size(); ++t) {
        const auto rr = clamp_idx(static_cast<std::int64_t>(r + t) - half, height);
        s += kernel[t] * tmp[rr * width + c];
      }
      out[r * width + c] = s;
    }
  }
}

}  // namespace reference
}  // namespace lup::kernels
