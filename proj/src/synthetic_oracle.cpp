#include "lup/synthetic_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lup/kernels.hpp"

namespace lup {
namespace {

std::vector<double> to_double(std::span<const float> x) { return {x.begin(), x.end()}; }

void normalize(std::vector<double>& v) {
  const double n = std::sqrt(kernels::dot(std::span<const double>(v), std::span<const double>(v)));
  if (n > 0.0) {
    for (auto& e : v) e /= n;
  }
}

std::vector<double> gaussian_vector(std::size_t n, RngStream& rng) {
  std::vector<double> v(n);
  for (auto& e : v) e = rng.normal();
  return v;
}

// Modified Gram-Schmidt, applied twice for orthogonality at double precision.
void orthonormalize(std::vector<std::vector<double>>& vs) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < vs.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double p = kernels::dot(std::span<const double>(vs[i]), std::span<const double>(vs[j]));
        for (std::size_t t = 0; t < vs[i].size(); ++t) vs[i][t] -= p * vs[j][t];
      }
      normalize(vs[i]);
    }
  }
}

}  // namespace

std::vector<double> low_frequency_field(Dims dims, RngStream& rng, std::size_t terms) {
  std::vector<double> out(dims.size(), 0.0);
  const double hh = static_cast<double>(dims.height);
  const double ww = static_cast<double>(dims.width);
  for (std::size_t c = 0; c < dims.channels; ++c) {
    for (std::size_t t = 0; t < terms; ++t) {
      const double fy = rng.uniform(0.0, 3.0);
      const double fx = rng.uniform(0.0, 3.0);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double amp = rng.uniform(0.5, 1.5);
      for (std::size_t h = 0; h < dims.height; ++h) {
        for (std::size_t w = 0; w < dims.width; ++w) {
          out[(c * dims.height + h) * dims.width + w] +=
              amp * std::cos(2.0 * std::numbers::pi * (fy * h / hh + fx * w / ww) + phase);
        }
      }
    }
  }
  const double rms = std::sqrt(kernels::dot(std::span<const double>(out), std::span<const double>(out)) /
                               static_cast<double>(out.size()));
  if (rms > 0.0) {
    for (auto& v : out) v /= rms;
  }
  return out;
}

void SyntheticOracleSpec::validate() const {
  if (dims.size() == 0) throw ConfigError("synthetic oracle dims must be positive");
  if (!(range.lo < range.hi)) throw ConfigError("value range must satisfy lo < hi");
  switch (kind) {
    case SyntheticKind::affine:
      if (affine.rank > dims.size()) throw ConfigError("affine rank exceeds input dimension");
      if (!std::isfinite(affine.scale) || !(affine.bias_scale >= 0.0)) {
        throw ConfigError("affine scale must be finite and bias_scale nonnegative");
      }
      break;
    case SyntheticKind::blur_shift:
      if (blur.kernel_width == 0) throw ConfigError("blur kernel width must be positive");
      if (!blur.channel_offsets.empty() && blur.channel_offsets.size() != dims.channels) {
        throw ConfigError("blur channel_offsets must have one entry per channel");
      }
      if (!(blur.offset_scale >= 0.0)) throw ConfigError("blur offset_scale must be nonnegative");
      break;
    case SyntheticKind::subspace_sensitive:
      if (subspace.dim == 0) throw ConfigError("subspace dimension k must be positive");
      if (subspace.dim > dims.size()) throw ConfigError("subspace dimension exceeds input dimension");
      if (!(subspace.gain >= 0.0) || !std::isfinite(subspace.gain)) {
        throw ConfigError("subspace gain must be finite and nonnegative");
      }
      break;
  }
}

std::string SyntheticOracle::name() const {
  return "synthetic-" + std::string(to_string(spec_.kind)) + "-" + std::to_string(spec_.seed);
}

std::vector<double> SyntheticOracle::vjp(std::span<const double>, std::span<const double>) const {
  throw CapabilityError("oracle kind '" + std::string(to_string(spec_.kind)) +
                        "' has no closed-form gradient");
}

std::vector<double> SyntheticOracle::evaluate(std::span<const double> x) const {
  auto y = evaluate_unclipped(x);
  for (auto& v : y) v = std::clamp(v, spec_.range.lo, spec_.range.hi);
  return y;
}

ImageTensor SyntheticOracle::query(const ImageTensor& x) const {
  if (x.dims() != spec_.dims) throw ShapeError("synthetic oracle input dims mismatch");
  const auto y = evaluate(to_double(x.data()));
  std::vector<float> out(y.size());
  std::transform(y.begin(), y.end(), out.begin(), [](double v) { return static_cast<float>(v); });
  return ImageTensor(spec_.dims, std::move(out), spec_.range);
}

AffineOracle::AffineOracle(SyntheticOracleSpec spec) : SyntheticOracle(std::move(spec)) {
  const auto& s = this->spec();
  RngStream rng(s.seed, 0xaff1);
  for (std::size_t i = 0; i < s.affine.rank; ++i) {
    left_.push_back(low_frequency_field(s.dims, rng));
    normalize(left_.back());
    right_.push_back(low_frequency_field(s.dims, rng));
    normalize(right_.back());
  }
  bias_ = low_frequency_field(s.dims, rng);
  for (auto& v : bias_) v *= s.affine.bias_scale;
}

std::vector<double> AffineOracle::evaluate_unclipped(std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  const double scale = spec().affine.scale;
  for (std::size_t i = 0; i < left_.size(); ++i) {
    const double c = scale * kernels::dot(std::span<const double>(right_[i]), x);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] += c * left_[i][t];
  }
  for (std::size_t t = 0; t < y.size(); ++t) y[t] += bias_[t];
  return y;
}

std::vector<double> AffineOracle::vjp(std::span<const double>, std::span<const double> v) const {
  std::vector<double> g(v.begin(), v.end());
  const double scale = spec().affine.scale;
  for (std::size_t i = 0; i < left_.size(); ++i) {
    const double c = scale * kernels::dot(std::span<const double>(left_[i]), v);
    for (std::size_t t = 0; t < g.size(); ++t) g[t] += c * right_[i][t];
  }
  return g;
}

BlurShiftOracle::BlurShiftOracle(SyntheticOracleSpec spec) : SyntheticOracle(std::move(spec)) {
  const auto& s = this->spec();
  RngStream rng(s.seed, 0xb1a5);
  kernel_.resize(s.blur.kernel_width);
  double total = 0.0;
  for (auto& w : kernel_) {
    w = rng.uniform(0.5, 1.5);
    total += w;
  }
  for (auto& w : kernel_) w /= total;
  if (!s.blur.channel_offsets.empty()) {
    offsets_ = s.blur.channel_offsets;
  } else {
    offsets_.resize(s.dims.channels);
    for (auto& o : offsets_) o = rng.uniform(-s.blur.offset_scale, s.blur.offset_scale);
  }
}

std::vector<double> BlurShiftOracle::evaluate_unclipped(std::span<const double> x) const {
  const auto& d = spec().dims;
  const std::size_t plane = d.height * d.width;
  std::vector<double> y(x.size());
  for (std::size_t c = 0; c < d.channels; ++c) {
    auto out = std::span<double>(y).subspan(c * plane, plane);
    kernels::separable_blur(x.subspan(c * plane, plane), d.height, d.width, kernel_, out);
    for (auto& v : out) v += offsets_[c];
  }
  return y;
}

SubspaceSensitiveOracle::SubspaceSensitiveOracle(SyntheticOracleSpec spec)
    : SyntheticOracle(std::move(spec)) {
  const auto& s = this->spec();
  const std::size_t n = s.dims.size();
  RngStream rng(s.seed, 0x5ab5);
  for (std::size_t j = 0; j < s.subspace.dim; ++j) directions_.push_back(gaussian_vector(n, rng));
  orthonormalize(directions_);
  for (std::size_t j = 0; j < s.subspace.dim; ++j) patterns_.push_back(gaussian_vector(n, rng));
}

std::vector<double> SubspaceSensitiveOracle::evaluate_unclipped(std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  const double gain = spec().subspace.gain;
  if (gain == 0.0) return y;
  for (std::size_t j = 0; j < directions_.size(); ++j) {
    const double c = gain * std::tanh(kernels::dot(std::span<const double>(directions_[j]), x));
    for (std::size_t t = 0; t < y.size(); ++t) y[t] += c * patterns_[j][t];
  }
  return y;
}

std::vector<double> SubspaceSensitiveOracle::vjp(std::span<const double> x,
                                                 std::span<const double> v) const {
  std::vector<double> g(v.begin(), v.end());
  const double gain = spec().subspace.gain;
  for (std::size_t j = 0; j < directions_.size(); ++j) {
    const double t = std::tanh(kernels::dot(std::span<const double>(directions_[j]), x));
    const double c = gain * (1.0 - t * t) * kernels::dot(std::span<const double>(patterns_[j]), v);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += c * directions_[j][i];
  }
  return g;
}

std::shared_ptr<const SyntheticOracle> make_synthetic_oracle(const SyntheticOracleSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case SyntheticKind::affine:
      return std::make_shared<AffineOracle>(spec);
    case SyntheticKind::blur_shift:
      return std::make_shared<BlurShiftOracle>(spec);
    case SyntheticKind::subspace_sensitive:
      return std::make_shared<SubspaceSensitiveOracle>(spec);
  }
  throw ConfigError("unknown synthetic oracle kind");
}

ImageTensor analytic_gradient(const SyntheticOracleSpec& spec, const AttackObjective& objective,
                              const ImageTensor& x) {
  const auto oracle = make_synthetic_oracle(spec);
  if (!oracle->has_gradient()) {
    throw CapabilityError("oracle kind '" + std::string(to_string(spec.kind)) +
                          "' has no closed-form gradient");
  }
  if (x.dims() != spec.dims) throw ShapeError("analytic_gradient: input dims mismatch");
  require_same_dims(x, objective.target, "analytic_gradient");

  const auto xd = to_double(x.data());
  const auto y = oracle->evaluate_unclipped(xd);
  const double n = static_cast<double>(y.size());
  const double sign = objective.direction == Direction::minimize ? 1.0 : -1.0;
  std::vector<double> dloss(y.size(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < spec.range.lo || y[i] > spec.range.hi) continue;
    const double diff = y[i] - static_cast<double>(objective.target[i]);
    switch (objective.loss) {
      case LossKind::mse:
        dloss[i] = sign * 2.0 * diff / n;
        break;
      case LossKind::mae:
        dloss[i] = sign * static_cast<double>((diff > 0.0) - (diff < 0.0)) / n;
        break;
    }
  }
  const auto g = oracle->vjp(xd, dloss);
  std::vector<float> out(g.size());
  std::transform(g.begin(), g.end(), out.begin(), [](double v) { return static_cast<float>(v); });
  return ImageTensor(spec.dims, std::move(out), spec.range);
}

std::string_view to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::affine:
      return "affine";
    case SyntheticKind::blur_shift:
      return "blur_shift";
    case SyntheticKind::subspace_sensitive:
      return "subspace_sensitive";
  }
  return "unknown";
}

SyntheticKind parse_synthetic_kind(std::string_view s) {
  if (s == "affine") return SyntheticKind::affine;
  if (s == "blur_shift") return SyntheticKind::blur_shift;
  if (s == "subspace_sensitive") return SyntheticKind::subspace_sensitive;
  throw ConfigError("unknown synthetic oracle kind '" + std::string(s) + "'");
}

}  // namespace lup
