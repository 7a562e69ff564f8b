#include <algorithm>
#include <cmath>
#include <numeric>

#include "lup/kernels.hpp"
#include "lup/lup.hpp"

namespace lup {
namespace detail {

SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
    return s;
  };
  double scale = 0.0;
  for (double e : a) scale += e * e;

  for (int sweep = 0; sweep < 100 && off_norm() > 1e-30 * scale; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        // Rotation angle zeroing a[p,q] (Golub & Van Loan, symmetric Schur).
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a[order[j] * n + order[j]];
    for (std::size_t k = 0; k < n; ++k) out.vectors[k * n + j] = v[k * n + order[j]];
  }
  return out;
}

}  // namespace detail

namespace {

// Re-orthonormalise in order; the leading components are the most accurate.
void reorthonormalize(std::vector<std::vector<double>>& vs) {
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const double p = kernels::dot(std::span<const double>(vs[i]), std::span<const double>(vs[j]));
        for (std::size_t t = 0; t < vs[i].size(); ++t) vs[i][t] -= p * vs[j][t];
      }
    }
    const double n = std::sqrt(kernels::dot(std::span<const double>(vs[i]), std::span<const double>(vs[i])));
    for (auto& e : vs[i]) e /= n;
  }
}

void fix_sign(std::vector<double>& v) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  }
  if (v[arg] < 0.0) {
    for (auto& e : v) e = -e;
  }
}

}  // namespace

PrincipalComponents extract_components(std::span<const ImageTensor> perturbations) {
  if (perturbations.empty()) throw ConfigError("extract_components needs at least one perturbation");
  const Dims dims = perturbations.front().dims();
  const ValueRange range = perturbations.front().range();
  for (const auto& p : perturbations) {
    if (p.dims() != dims) throw ShapeError("extract_components: perturbations differ in dims");
  }
  const std::size_t rows = perturbations.size();
  const std::size_t cols = dims.size();

  // Centred data matrix, one flattened perturbation per row.
  std::vector<double> data(rows * cols);
  std::vector<double> mean(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto d = perturbations[r].data();
    for (std::size_t c = 0; c < cols; ++c) mean[c] += d[c];
  }
  for (auto& m : mean) m /= static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto d = perturbations[r].data();
    for (std::size_t c = 0; c < cols; ++c) data[r * cols + c] = d[c] - mean[c];
  }

  PrincipalComponents out;
  if (rows < 2) return out;
  const double denom = static_cast<double>(rows - 1);

  std::vector<std::vector<double>> directions;
  std::vector<double> eigenvalues;
  if (rows <= cols) {
    // Eigenvectors w of X X^T map to principal directions X^T w / sqrt(lambda).
    const auto eig = detail::jacobi_eigen(kernels::gram(data, rows, cols), rows);
    const double top = eig.values.empty() ? 0.0 : eig.values.front();
    for (std::size_t j = 0; j < rows; ++j) {
      const double lambda = eig.values[j];
      if (!(top > 0.0) || !(lambda > 1e-12 * top)) break;
      std::vector<double> dir(cols, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        const double w = eig.vectors[r * rows + j];
        for (std::size_t c = 0; c < cols; ++c) dir[c] += w * data[r * cols + c];
      }
      const double inv = 1.0 / std::sqrt(lambda);
      for (auto& e : dir) e *= inv;
      directions.push_back(std::move(dir));
      eigenvalues.push_back(lambda);
    }
  } else {
    const auto eig = detail::jacobi_eigen(kernels::cross_product(data, rows, cols), cols);
    const double top = eig.values.empty() ? 0.0 : eig.values.front();
    for (std::size_t j = 0; j < cols; ++j) {
      const double lambda = eig.values[j];
      if (!(top > 0.0) || !(lambda > 1e-12 * top)) break;
      std::vector<double> dir(cols);
      for (std::size_t c = 0; c < cols; ++c) dir[c] = eig.vectors[c * cols + j];
      directions.push_back(std::move(dir));
      eigenvalues.push_back(lambda);
    }
  }

  reorthonormalize(directions);
  for (std::size_t j = 0; j < directions.size(); ++j) {
    fix_sign(directions[j]);
    std::vector<float> f(directions[j].begin(), directions[j].end());
    out.components.emplace_back(dims, std::move(f), range);
    out.explained_variance.push_back(eigenvalues[j] / denom);
  }
  return out;
}

}  // namespace lup
