#include <doctest.h>

#include <cmath>
#include <vector>

#include "lup/kernels.hpp"
#include "lup/objective.hpp"
#include "lup/rng.hpp"

using namespace lup;

namespace {

ImageTensor random_tensor(Dims dims, std::uint64_t seed, double scale = 1.0) {
  RngStream rng(seed, 99);
  ImageTensor t = sample_gaussian(dims, rng);
  t *= static_cast<float>(scale);
  return t;
}

// Scalar-loop oracles, independent of the kernels.
double loop_mse(const ImageTensor& a, const ImageTensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double loop_mae(const ImageTensor& a, const ImageTensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(static_cast<double>(a[i]) - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("ImageTensor validates its invariants") {
  CHECK_THROWS_AS(ImageTensor(Dims{3, 2, 2}, std::vector<float>(11, 0.0f)), ShapeError);
  CHECK_THROWS_AS(ImageTensor(Dims{0, 2, 2}), ShapeError);
  CHECK_THROWS_AS(ImageTensor(Dims{1, 1, 1}, std::vector<float>{NAN}), ShapeError);
  CHECK_THROWS_AS(ImageTensor(Dims{1, 1, 1}, std::vector<float>{INFINITY}), ShapeError);
  CHECK_THROWS_AS(ImageTensor(Dims{1, 1, 1}, ValueRange{1.0, 1.0}), ConfigError);

  ImageTensor t(Dims{2, 3, 4});
  t.at(1, 2, 3) = 5.0f;
  CHECK(t[23] == 5.0f);  // row-major: c, then h, then w
  t.at(0, 1, 2) = 7.0f;
  CHECK(t[6] == 7.0f);
}

TEST_CASE("regression_loss") {
  const Dims dims{3, 4, 4};
  SUBCASE("identical tensors give exactly zero") {
    const auto a = random_tensor(dims, 1);
    CHECK(regression_loss(a, a, LossKind::mse) == 0.0);
    CHECK(regression_loss(a, a, LossKind::mae) == 0.0);
  }
  SUBCASE("constant offset") {
    const auto a = ImageTensor::filled(dims, 0.0f);
    const auto b = ImageTensor::filled(dims, 0.1f);
    CHECK(regression_loss(a, b, LossKind::mse) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(regression_loss(a, b, LossKind::mae) == doctest::Approx(0.1).epsilon(1e-6));
  }
  SUBCASE("matches the scalar loop on random pairs") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto a = random_tensor(dims, seed);
      const auto b = random_tensor(dims, seed + 1000);
      CHECK(regression_loss(a, b, LossKind::mse) == doctest::Approx(loop_mse(a, b)).epsilon(1e-12));
      CHECK(regression_loss(a, b, LossKind::mae) == doctest::Approx(loop_mae(a, b)).epsilon(1e-12));
    }
  }
  SUBCASE("symmetric and positive off the diagonal") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto a = random_tensor(dims, seed);
      const auto b = random_tensor(dims, seed + 7);
      CHECK(regression_loss(a, b, LossKind::mse) == regression_loss(b, a, LossKind::mse));
      CHECK(regression_loss(a, b, LossKind::mae) == regression_loss(b, a, LossKind::mae));
      CHECK(regression_loss(a, b, LossKind::mse) > 0.0);
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(regression_loss(ImageTensor(Dims{3, 4, 4}), ImageTensor(Dims{3, 4, 5}), LossKind::mse),
                    ShapeError);
  }
}

TEST_CASE("perturbation_norm") {
  const Dims dims{3, 4, 4};
  CHECK(perturbation_norm(ImageTensor(dims), NormKind::l2) == 0.0);
  CHECK(perturbation_norm(ImageTensor(dims), NormKind::linf) == 0.0);

  ImageTensor single(dims);
  single[5] = 0.4f;
  CHECK(perturbation_norm(single, NormKind::l2) == doctest::Approx(0.4).epsilon(1e-7));
  CHECK(perturbation_norm(single, NormKind::linf) == doctest::Approx(0.4).epsilon(1e-7));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto eta = random_tensor(dims, seed);
    double sq = 0.0;
    double mx = 0.0;
    for (float v : eta.data()) {
      sq += static_cast<double>(v) * v;
      mx = std::max(mx, std::fabs(static_cast<double>(v)));
    }
    CHECK(perturbation_norm(eta, NormKind::l2) == doctest::Approx(std::sqrt(sq)).epsilon(1e-12));
    CHECK(perturbation_norm(eta, NormKind::linf) == mx);

    // Absolute homogeneity; powers of two keep the float scaling exact.
    for (float s : {-2.0f, 0.5f, 4.0f}) {
      const ImageTensor scaled = s * eta;
      for (auto p : {NormKind::l2, NormKind::linf}) {
        CHECK(perturbation_norm(scaled, p) ==
              doctest::Approx(std::fabs(s) * perturbation_norm(eta, p)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("clip_to_range") {
  const Dims dims{1, 2, 2};
  const ImageTensor inside(dims, {-1.0f, -0.5f, 0.25f, 1.0f});
  CHECK(clip_to_range(inside) == inside);

  const ImageTensor outside(dims, {1.7f, -3.0f, 0.0f, 0.9f});
  const auto clipped = clip_to_range(outside);
  CHECK(clipped[0] == 1.0f);
  CHECK(clipped[1] == -1.0f);
  CHECK(clipped[2] == 0.0f);
  CHECK(clipped[3] == 0.9f);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = random_tensor(Dims{3, 8, 8}, seed, 2.0);
    const auto once = clip_to_range(x);
    CHECK(clip_to_range(once) == once);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(x.range().contains(once[i]));
      if (x.range().contains(x[i])) CHECK(once[i] == x[i]);
    }
  }
}

TEST_CASE("RngStream determinism and moments") {
  const Dims dims{3, 8, 8};
  RngStream a(42, 7);
  RngStream b(42, 7);
  CHECK(sample_gaussian(dims, a) == sample_gaussian(dims, b));

  RngStream c(42, 8);
  RngStream d(42, 7);
  CHECK_FALSE(sample_gaussian(dims, c) == sample_gaussian(dims, d));

  RngStream m(1, 2);
  const auto big = sample_gaussian(Dims{1, 1, 100000}, m);
  double mean = 0.0;
  for (float v : big.data()) mean += v;
  mean /= 100000.0;
  double var = 0.0;
  for (float v : big.data()) var += (v - mean) * (v - mean);
  var /= 100000.0;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(std::fabs(var - 1.0) < 0.05);

  // First draws are pinned so a change in the generator is caught.
  RngStream pinned(0, 0);
  const std::uint64_t first = pinned.next_u64();
  RngStream again(0, 0);
  CHECK(again.next_u64() == first);
  CHECK(RngStream(0, 0).substream(3).next_u64() == RngStream(0, 0).substream(3).next_u64());
  CHECK(RngStream(0, 0).substream(3).next_u64() != RngStream(0, 0).substream(4).next_u64());
}

TEST_CASE("RngStream bounded integers and shuffles") {
  RngStream rng(5, 5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);

  std::vector<int> items(100);
  for (int i = 0; i < 100; ++i) items[i] = i;
  rng.shuffle(std::span<int>(items));
  std::vector<int> sorted = items;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) CHECK(sorted[i] == i);
  CHECK(items != sorted);
}

TEST_CASE("parallel kernels agree with the serial reference") {
  RngStream rng(3, 3);
  for (std::size_t n : {std::size_t{1}, std::size_t{4095}, std::size_t{4097}, std::size_t{100003}}) {
    std::vector<float> a(n), b(n);
    for (auto& v : a) v = static_cast<float>(rng.normal());
    for (auto& v : b) v = static_cast<float>(rng.normal());
    CHECK(kernels::sum_squared_diff(a, b) ==
          doctest::Approx(kernels::reference::sum_squared_diff(a, b)).epsilon(1e-12));
    CHECK(kernels::sum_abs_diff(a, b) == doctest::Approx(kernels::reference::sum_abs_diff(a, b)).epsilon(1e-12));
    CHECK(kernels::sum_squares(a) == doctest::Approx(kernels::reference::sum_squares(a)).epsilon(1e-12));
    CHECK(kernels::max_abs(a) == kernels::reference::max_abs(a));
    CHECK(kernels::dot(std::span<const float>(a), std::span<const float>(b)) ==
          doctest::Approx(kernels::reference::dot(std::span<const float>(a), std::span<const float>(b))).epsilon(1e-11));

    std::vector<float> y1 = b, y2 = b;
    kernels::axpy(0.3f, a, y1);
    kernels::reference::axpy(0.3f, a, y2);
    CHECK(y1 == y2);
    kernels::clamp(-0.5f, 0.5f, y1);
    kernels::reference::clamp(-0.5f, 0.5f, y2);
    CHECK(y1 == y2);
  }

  const std::size_t rows = 13, cols = 301;
  std::vector<double> m(rows * cols);
  for (auto& v : m) v = rng.normal();
  const auto g1 = kernels::gram(m, rows, cols);
  const auto g2 = kernels::reference::gram(m, rows, cols);
  const auto c1 = kernels::cross_product(m, rows, cols);
  const auto c2 = kernels::reference::cross_product(m, rows, cols);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < c1.size(); ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-12));

  const std::size_t h = 37, w = 29;
  std::vector<double> plane(h * w);
  for (auto& v : plane) v = rng.normal();
  const std::vector<double> kernel{0.2, 0.5, 0.3};
  std::vector<double> o1(h * w), o2(h * w);
  kernels::separable_blur(plane, h, w, kernel, o1);
  kernels::reference::separable_blur(plane, h, w, kernel, o2);
  for (std::size_t i = 0; i < o1.size(); ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-12));
}

TEST_CASE("blocked reductions do not depend on the thread count") {
  RngStream rng(9, 9);
  std::vector<float> a(200000);
  for (auto& v : a) v = static_cast<float>(rng.normal());
  const double first = kernels::sum_squares(a);
  for (int i = 0; i < 5; ++i) CHECK(kernels::sum_squares(a) == first);
}

TEST_CASE("success_holds") {
  AttackObjective obj;
  obj.target = ImageTensor(Dims{1, 1, 1});
  obj.threshold = 0.005;
  obj.direction = Direction::minimize;
  CHECK(success_holds(0.004, obj));
  CHECK(success_holds(0.005, obj));
  CHECK_FALSE(success_holds(0.0051, obj));

  obj.threshold = 0.05;
  obj.direction = Direction::maximize;
  CHECK(success_holds(0.05, obj));
  CHECK_FALSE(success_holds(0.049, obj));

  obj.threshold = 0.0;
  obj.direction = Direction::minimize;
  CHECK_FALSE(success_holds(1e-9, obj));
  CHECK(success_holds(0.0, obj));

  obj.threshold = -1.0;
  CHECK_THROWS_AS(obj.validate(), ConfigError);
}
