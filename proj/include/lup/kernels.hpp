#pragma once

// Data-parallel inner loops shared by the tensor, oracle and PCA code.
//
// Every kernel has two implementations: the OpenMP one in lup::kernels, used by the
// library, and a plain scalar loop in lup::kernels::reference that the tests and the
// benchmark compare against. Reductions accumulate in double. The parallel reductions
// split the input into fixed-size blocks and add the block partials in block order, so
// their result does not depend on the thread count.

#include <cstddef>
#include <span>
#include <vector>

namespace lup::kernels {

/// Elements per reduction block.
inline constexpr std::size_t kBlockSize = 4096;
/// Below this many elements the kernels stay on the calling thread.
inline constexpr std::size_t kParallelThreshold = 1 << 15;

double sum_squared_diff(std::span<const float> a, std::span<const float> b);
double sum_abs_diff(std::span<const float> a, std::span<const float> b);
double sum_squares(std::span<const float> a);
double max_abs(std::span<const float> a);
double dot(std::span<const float> a, std::span<const float> b);
double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(float alpha, std::span<const float> x, std::span<float> y);
void scale(float s, std::span<float> y);
void clamp(float lo, float hi, std::span<float> y);

/// Row-major (rows x cols) matrix times its transpose: out[i*rows+j] = <row_i, row_j>.
std::vector<double> gram(std::span<const double> matrix, std::size_t rows, std::size_t cols);

/// Transpose times matrix: out[i*cols+j] = sum_r m[r,i] * m[r,j].
std::vector<double> cross_product(std::span<const double> matrix, std::size_t rows,
                                  std::size_t cols);

/// Separable blur of one (height, width) plane with a 1-D kernel centred on each
/// pixel; borders clamp to the edge. Applied along rows, then columns.
void separable_blur(std::span<const double> plane, std::size_t height, std::size_t width,
                    std::span<const double> kernel, std::span<double> out);

namespace reference {

double sum_squared_diff(std::span<const float> a, std::span<const float> b);
double sum_abs_diff(std::span<const float> a, std::span<const float> b);
double sum_squares(std::span<const float> a);
double max_abs(std::span<const float> a);
double dot(std::span<const float> a, std::span<const float> b);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(float alpha, std::span<const float> x, std::span<float> y);
void clamp(float lo, float hi, std::span<float> y);
std::vector<double> gram(std::span<const double> matrix, std::size_t rows, std::size_t cols);
std::vector<double> cross_product(std::span<const double> matrix, std::size_t rows,
                                  std::size_t cols);
void separable_blur(std::span<const double> plane, std::size_t height, std::size_t width,
                    std::span<const double> kernel, std::span<double> out);

}  // namespace reference
}  // namespace lup::kernels
