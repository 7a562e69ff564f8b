#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <vector>

#include "lup/kernels.hpp"
#include "lup/lup.hpp"
#include "lup/synthetic_oracle.hpp"

using namespace lup;

namespace {

ImageTensor gaussian(Dims dims, std::uint64_t seed, float scale = 1.0f) {
  RngStream rng(seed, 61);
  auto t = sample_gaussian(dims, rng);
  t *= scale;
  return t;
}

// Principal components by dense covariance eigendecomposition.
struct DensePca {
  Eigen::MatrixXd vectors;  // columns, descending eigenvalue
  Eigen::VectorXd values;
};

DensePca dense_pca(const std::vector<ImageTensor>& samples) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto d = static_cast<Eigen::Index>(samples.front().size());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < d; ++c) x(r, c) = samples[r][c];
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  return {es.eigenvectors().rowwise().reverse(), es.eigenvalues().reverse()};
}

Eigen::MatrixXd as_matrix(const std::vector<ImageTensor>& columns, std::size_t take) {
  Eigen::MatrixXd m(columns.front().size(), take);
  for (std::size_t j = 0; j < take; ++j)
    for (std::size_t i = 0; i < columns[j].size(); ++i) m(i, j) = columns[j][i];
  return m;
}

// Sine of the largest principal angle between the column spaces of a and b.
double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd qa = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
                             Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd qb = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ() *
                             Eigen::MatrixXd::Identity(b.rows(), b.cols());
  const Eigen::MatrixXd resid = qa - qb * (qb.transpose() * qa);
  const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(resid).singularValues()(0);
  return std::asin(std::min(1.0, s));
}

class ConstantOracle final : public Oracle {
 public:
  explicit ConstantOracle(Dims dims) : dims_(dims) {}
  Dims input_dims() const override { return dims_; }
  Dims output_dims() const override { return dims_; }
  ValueRange value_range() const override { return {}; }
  std::string name() const override { return "constant"; }
  ImageTensor query(const ImageTensor&) const override { return ImageTensor::filled(dims_, 0.25f); }

 private:
  Dims dims_;
};

// Wraps a source and counts how many candidates were taken from it.
class CountingSource final : public CandidateSource {
 public:
  explicit CountingSource(CandidateSource& inner) : inner_(inner) {}
  std::optional<Candidate> next() override {
    auto q = inner_.next();
    if (q) ++drawn;
    return q;
  }
  std::size_t drawn = 0;

 private:
  CandidateSource& inner_;
};

std::vector<ImageTensor> unit_axes(Dims dims, std::size_t count) {
  std::vector<ImageTensor> out;
  for (std::size_t i = 0; i < count; ++i) {
    ImageTensor t(dims);
    t[i] = 1.0f;
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST_CASE("Jacobi eigensolver diagonalises symmetric matrices") {
  const std::vector<double> m = {2, 1, 0, 1, 2, 0, 0, 0, 5};
  const auto e = detail::jacobi_eigen(m, 3);
  CHECK(e.values[0] == doctest::Approx(5.0));
  CHECK(e.values[1] == doctest::Approx(3.0));
  CHECK(e.values[2] == doctest::Approx(1.0));

  RngStream rng(4, 4);
  const std::size_t n = 12;
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a[i * n + j] = a[j * n + i] = rng.normal();
  const auto eig = detail::jacobi_eigen(a, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double rec = 0.0;
      for (std::size_t k = 0; k < n; ++k) rec += eig.vectors[i * n + k] * eig.values[k] * eig.vectors[j * n + k];
      CHECK(rec == doctest::Approx(a[i * n + j]).epsilon(1e-10).scale(1.0));
    }
  }
  for (std::size_t k = 1; k < n; ++k) CHECK(eig.values[k] <= eig.values[k - 1]);
}

TEST_CASE("extract_components matches a dense covariance eigendecomposition") {
  const Dims dims{3, 8, 8};
  // Fewer samples than pixels uses the Gram route; more samples uses the covariance route.
  for (std::size_t count : {std::size_t{30}, std::size_t{400}}) {
    std::vector<ImageTensor> samples;
    const auto basis = std::vector<ImageTensor>{gaussian(dims, 1), gaussian(dims, 2), gaussian(dims, 3)};
    for (std::size_t i = 0; i < count; ++i) {
      ImageTensor s = gaussian(dims, 1000 + i, 0.05f);
      RngStream coef(i, 9);
      for (std::size_t b = 0; b < basis.size(); ++b) s.add_scaled(static_cast<float>((3.0 - b) * coef.normal()), basis[b]);
      samples.push_back(s);
    }
    const auto pcs = extract_components(samples);
    const auto ref = dense_pca(samples);
    INFO("count=" << count);
    REQUIRE(pcs.components.size() == std::min(count - 1, dims.size()));
    for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
      CHECK(max_principal_angle(as_matrix(pcs.components, k), ref.vectors.leftCols(static_cast<Eigen::Index>(k))) < 1e-4);
    }
    for (std::size_t k = 0; k < 10; ++k) {
      CHECK(pcs.explained_variance[k] == doctest::Approx(ref.values(static_cast<Eigen::Index>(k))).epsilon(1e-6));
    }
    for (std::size_t k = 1; k < pcs.explained_variance.size(); ++k) {
      CHECK(pcs.explained_variance[k] <= pcs.explained_variance[k - 1]);
    }
    // Orthonormal up to float storage.
    for (std::size_t a = 0; a < 10; ++a) {
      for (std::size_t b = 0; b < 10; ++b) {
        const double d = kernels::dot(pcs.components[a].data(), pcs.components[b].data());
        CHECK(d == doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-5));
      }
    }
    // Sign convention: the largest-magnitude entry is positive.
    for (const auto& c : pcs.components) {
      float best = 0.0f;
      for (float v : c.data()) if (std::fabs(v) > std::fabs(best)) best = v;
      CHECK(best > 0.0f);
    }
  }
}

TEST_CASE("extract_components recovers a planted direction") {
  const Dims dims{3, 8, 8};
  ImageTensor planted = gaussian(dims, 77);
  planted *= static_cast<float>(1.0 / std::sqrt(kernels::sum_squares(planted.data())));
  std::vector<ImageTensor> samples;
  RngStream coef(3, 3);
  for (std::size_t i = 0; i < 50; ++i) {
    ImageTensor s = gaussian(dims, 500 + i, 0.02f);
    s.add_scaled(static_cast<float>(coef.normal()), planted);
    samples.push_back(s);
  }
  const auto pcs = extract_components(samples);
  REQUIRE_FALSE(pcs.components.empty());
  CHECK(std::fabs(kernels::dot(pcs.components[0].data(), planted.data())) > 0.99);
}

TEST_CASE("extract_components degenerate inputs") {
  const Dims dims{1, 3, 3};
  const auto one = gaussian(dims, 1);
  CHECK(extract_components(std::vector<ImageTensor>{one}).components.empty());
  CHECK(extract_components(std::vector<ImageTensor>{one, one, one}).components.empty());
  CHECK_THROWS_AS(extract_components(std::vector<ImageTensor>{}), ConfigError);
  CHECK_THROWS_AS(extract_components(std::vector<ImageTensor>{one, ImageTensor(Dims{1, 3, 4})}), ShapeError);
  // Two distinct samples span exactly one centred direction.
  const auto two = extract_components(std::vector<ImageTensor>{one, gaussian(dims, 2)});
  CHECK(two.components.size() == 1);
}

TEST_CASE("exploit_phase with no components is IT-SimBA") {
  SyntheticOracleSpec spec;
  spec.kind = SyntheticKind::subspace_sensitive;
  spec.dims = Dims{3, 8, 8};
  spec.seed = 5;
  const auto oracle = make_synthetic_oracle(spec);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = gaussian(spec.dims, seed, 0.3f);
    AttackObjective obj;
    obj.target = oracle->query(x);
    obj.direction = Direction::maximize;
    obj.threshold = 0.004;
    QueryLedger a(500), b(500);
    SimbaConfig scfg;
    scfg.rng = RngStream(seed, 12);
    ExploitConfig ecfg;
    ecfg.fallback_basis_rng = RngStream(seed, 12);
    const auto s = it_simba_attack(*oracle, a, obj, x, scfg);
    const auto e = exploit_phase(*oracle, b, obj, x, std::span<const ImageTensor>{}, ecfg);
    CHECK(s.queries_used == e.queries_used);
    CHECK(s.eta == e.eta);
    CHECK(s.success == e.success);
    CHECK(e.fallback_engaged);
    CHECK(e.fallback_at_query == 1);
    REQUIRE(s.loss_trace.size() == e.loss_trace.size());
    for (std::size_t i = 0; i < s.loss_trace.size(); ++i) {
      CHECK(s.loss_trace[i].query_index == e.loss_trace[i].query_index);
      CHECK(s.loss_trace[i].loss == e.loss_trace[i].loss);
    }
  }
}

TEST_CASE("saturation counter switches to the pixel basis") {
  const Dims dims{1, 4, 4};
  ConstantOracle oracle(dims);
  AttackObjective obj;
  obj.target = ImageTensor(dims);
  const auto dirs = unit_axes(dims, 12);

  // n_sat -> number of fully failed leaked candidates before the switch.
  const std::vector<std::pair<std::size_t, std::size_t>> cases = {{1, 1}, {2, 1}, {3, 1}, {4, 2}, {5, 2},
                                                                   {20, 10}, {21, 10}};
  for (const auto& [n_sat, candidates] : cases) {
    ComponentSource leaked_inner(dirs);
    CountingSource leaked(leaked_inner);
    PixelBasisSource fallback(dims, RngStream(1, 1));
    QueryLedger ledger(100);
    const auto out = exploit_phase(oracle, ledger, obj, ImageTensor(dims), leaked, fallback, 0.4, n_sat);
    INFO("n_sat=" << n_sat);
    CHECK(out.fallback_engaged);
    CHECK(leaked.drawn == candidates);
    CHECK(out.fallback_at_query == 1 + 2 * candidates);
    // Every pixel is then probed twice.
    CHECK(out.queries_used == 1 + 2 * candidates + 2 * dims.size());
  }
}

TEST_CASE("exhausting the leaked components engages the fallback") {
  const Dims dims{1, 4, 4};
  ConstantOracle oracle(dims);
  AttackObjective obj;
  obj.target = ImageTensor(dims);
  const auto dirs = unit_axes(dims, 3);
  ComponentSource leaked(dirs);
  PixelBasisSource fallback(dims, RngStream(1, 1));
  QueryLedger ledger(100);
  const auto out = exploit_phase(oracle, ledger, obj, ImageTensor(dims), leaked, fallback, 0.4, 20);
  CHECK(out.fallback_engaged);
  CHECK(out.fallback_at_query == 7);
}

TEST_CASE("exploit_phase draws components in stored order and never returns to them") {
  SyntheticOracleSpec spec;
  spec.kind = SyntheticKind::subspace_sensitive;
  spec.dims = Dims{1, 4, 4};
  spec.subspace.dim = 4;
  spec.subspace.gain = 0.5;
  const auto oracle = make_synthetic_oracle(spec);
  const auto x = gaussian(spec.dims, 3, 0.3f);
  AttackObjective obj;
  obj.target = gaussian(spec.dims, 4, 0.3f);
  obj.threshold = 0.0;

  {
    const auto dirs = unit_axes(spec.dims, 16);
    ComponentSource leaked_inner(dirs);
    CountingSource leaked(leaked_inner);
    PixelBasisSource fallback_inner(spec.dims, RngStream(2, 2));
    CountingSource fallback(fallback_inner);
    QueryLedger ledger(60);
    const auto out = exploit_phase(*oracle, ledger, obj, x, leaked, fallback, 0.1, 4);
    if (out.fallback_engaged) {
      // Every leaked draw happened before any fallback draw, and the query count
      // at the switch is consistent with the number of leaked draws.
      CHECK(out.fallback_at_query <= 1 + 2 * leaked.drawn);
      CHECK(out.fallback_at_query >= 1 + leaked.drawn);
    } else {
      CHECK(fallback.drawn == 0);
    }
    CHECK(out.queries_used == ledger.count());
  }
}

TEST_CASE("exploit_phase commits move along the leaked directions") {
  const Dims dims{1, 4, 4};
  SyntheticOracleSpec spec;
  spec.kind = SyntheticKind::affine;
  spec.dims = dims;
  const auto oracle = make_synthetic_oracle(spec);
  const ImageTensor x(dims);
  AttackObjective obj;
  obj.target = oracle->query(x);
  obj.target[5] += 0.3f;  // the target wants pixel 5 raised
  obj.threshold = 0.0;
  std::vector<ImageTensor> dirs = unit_axes(dims, 16);
  std::swap(dirs[0], dirs[5]);
  QueryLedger ledger(2);
  ExploitConfig cfg;
  cfg.step = 0.1;
  const auto out = exploit_phase(*oracle, ledger, obj, x, dirs, cfg);
  CHECK(out.eta[5] == doctest::Approx(0.1f));
  CHECK(perturbation_norm(out.eta, NormKind::l2) == doctest::Approx(0.1));
}

TEST_CASE("project_total_queries") {
  CHECK(project_total_queries(83952, 393.0, 100000) == 39383952.0);
  CHECK(project_total_queries(0, 551.0, 100000) == 55100000.0);
  CHECK(project_total_queries(10, 0.5, 4) == 12.0);
}

TEST_CASE("leak_phase is deterministic and accounts for every query") {
  SyntheticOracleSpec spec;
  spec.kind = SyntheticKind::subspace_sensitive;
  spec.dims = Dims{3, 8, 8};
  spec.subspace.gain = 0.3;
  const auto inner = make_synthetic_oracle(spec);
  std::vector<ImageTensor> images;
  for (std::uint64_t i = 0; i < 6; ++i) images.push_back(gaussian(spec.dims, 40 + i, 0.3f));
  const ObjectiveFactory factory = [](const ImageTensor& x, const Oracle& o, QueryLedger& ledger) {
    AttackObjective obj;
    obj.target = *budgeted_query(ledger, o, x);
    obj.direction = Direction::maximize;
    obj.threshold = 0.002;
    return obj;
  };
  SimbaConfig cfg;
  cfg.rng = RngStream(7, 0);

  auto counted = std::make_shared<CountingOracle>(inner);
  const auto serial = leak_phase(*counted, images, factory, cfg, 80, 1);
  CHECK(serial.total_leak_queries == counted->calls());
  CHECK(serial.perturbations.size() == images.size());
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    sum += serial.per_image_outcomes[i].queries_used + serial.objective_queries[i];
    CHECK(serial.objective_queries[i] == 1);
  }
  CHECK(sum == serial.total_leak_queries);

  const auto parallel = leak_phase(*inner, images, factory, cfg, 80, 4);
  for (std::size_t i = 0; i < images.size(); ++i) CHECK(parallel.perturbations[i] == serial.perturbations[i]);
  REQUIRE(parallel.basis.components.size() == serial.basis.components.size());
  for (std::size_t k = 0; k < serial.basis.components.size(); ++k) {
    CHECK(parallel.basis.components[k] == serial.basis.components[k]);
  }
}

TEST_CASE("component bundles round trip") {
  const Dims dims{3, 4, 4};
  std::vector<ImageTensor> samples;
  for (std::uint64_t i = 0; i < 8; ++i) samples.push_back(gaussian(dims, i));
  const auto pcs = extract_components(samples);
  BundleManifest manifest;
  manifest.dims = dims;
  manifest.explained_variance = pcs.explained_variance;
  manifest.leak_queries = 1234;
  manifest.seed = 99;
  const auto dir = std::filesystem::temp_directory_path() / "lup_bundle_test";
  std::filesystem::remove_all(dir);
  save_bundle(dir, pcs, manifest);
  const auto back = load_bundle(dir);
  CHECK(back.manifest.dims == dims);
  CHECK(back.manifest.explained_variance == pcs.explained_variance);
  CHECK(back.manifest.leak_queries == 1234);
  CHECK(back.manifest.seed == 99);
  CHECK(back.manifest.source_attack == "it-simba");
  REQUIRE(back.components.size() == pcs.components.size());
  for (std::size_t k = 0; k < pcs.components.size(); ++k) CHECK(back.components[k] == pcs.components[k]);
  CHECK(std::filesystem::exists(dir / "component_0000.btf"));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_bundle(dir), ConfigError);
}
