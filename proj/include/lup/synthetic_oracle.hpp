#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "lup/objective.hpp"
#include "lup/oracle.hpp"
#include "lup/rng.hpp"

namespace lup {

enum class SyntheticKind { affine, blur_shift, subspace_sensitive };

struct AffineParams {
  std::size_t rank = 2;     // rank of the perturbation A - I
  double scale = 0.2;       // spectral size of each rank-one term
  double bias_scale = 0.05; // RMS of the bias image b
};

struct BlurShiftParams {
  std::size_t kernel_width = 3;
  std::vector<double> channel_offsets;  // seeded in +-offset_scale when empty
  double offset_scale = 0.05;
};

struct SubspaceParams {
  std::size_t dim = 8;  // k
  double gain = 0.1;    // g
};

/// Fully determines a synthetic oracle: the same spec always rebuilds the same map.
struct SyntheticOracleSpec {
  SyntheticKind kind = SyntheticKind::affine;
  std::uint64_t seed = 0;
  Dims dims{3, 32, 32};
  ValueRange range{};
  AffineParams affine{};
  BlurShiftParams blur{};
  SubspaceParams subspace{};

  void validate() const;
};

/// Base of the in-process oracles with known structure. Computation is done in double;
/// query() rounds the clipped result to float.
class SyntheticOracle : public Oracle {
 public:
  explicit SyntheticOracle(SyntheticOracleSpec spec) : spec_(std::move(spec)) {}

  const SyntheticOracleSpec& spec() const { return spec_; }

  Dims input_dims() const override { return spec_.dims; }
  Dims output_dims() const override { return spec_.dims; }
  ValueRange value_range() const override { return spec_.range; }
  std::string name() const override;
  ImageTensor query(const ImageTensor& x) const override;

  /// G(x) before the output clip.
  virtual std::vector<double> evaluate_unclipped(std::span<const double> x) const = 0;
  /// J(x)^T v for the unclipped map. Throws CapabilityError when not available.
  virtual std::vector<double> vjp(std::span<const double> x, std::span<const double> v) const;
  virtual bool has_gradient() const { return false; }

  std::vector<double> evaluate(std::span<const double> x) const;

 private:
  SyntheticOracleSpec spec_;
};

/// G(x) = clip(x + scale * sum_i u_i <v_i, x> + b) with smooth unit-norm u_i, v_i.
class AffineOracle final : public SyntheticOracle {
 public:
  explicit AffineOracle(SyntheticOracleSpec spec);
  std::vector<double> evaluate_unclipped(std::span<const double> x) const override;
  std::vector<double> vjp(std::span<const double> x, std::span<const double> v) const override;
  bool has_gradient() const override { return true; }

 private:
  std::vector<std::vector<double>> left_;   // u_i
  std::vector<std::vector<double>> right_;  // v_i
  std::vector<double> bias_;
};

/// Per-channel separable blur with a seeded positive kernel, plus a per-channel offset.
class BlurShiftOracle final : public SyntheticOracle {
 public:
  explicit BlurShiftOracle(SyntheticOracleSpec spec);
  std::vector<double> evaluate_unclipped(std::span<const double> x) const override;

  std::span<const double> kernel() const { return kernel_; }
  std::span<const double> offsets() const { return offsets_; }

 private:
  std::vector<double> kernel_;
  std::vector<double> offsets_;
};

/// G(x) = clip(x + g * sum_j tanh(<x, u_j>) p_j): every image shares the sensitive
/// subspace span{u_j}.
class SubspaceSensitiveOracle final : public SyntheticOracle {
 public:
  explicit SubspaceSensitiveOracle(SyntheticOracleSpec spec);
  std::vector<double> evaluate_unclipped(std::span<const double> x) const override;
  std::vector<double> vjp(std::span<const double> x, std::span<const double> v) const override;
  bool has_gradient() const override { return true; }

  /// Orthonormal u_j.
  const std::vector<std::vector<double>>& directions() const { return directions_; }
  /// Response patterns p_j, unit RMS per element.
  const std::vector<std::vector<double>>& patterns() const { return patterns_; }

 private:
  std::vector<std::vector<double>> directions_;
  std::vector<std::vector<double>> patterns_;
};

std::shared_ptr<const SyntheticOracle> make_synthetic_oracle(const SyntheticOracleSpec& spec);

/// Exact gradient of the direction-signed loss s * L(G(x), r), s = +1 when minimizing
/// and -1 when maximizing. Stepping against the result improves the objective.
/// Clipped output coordinates contribute zero.
ImageTensor analytic_gradient(const SyntheticOracleSpec& spec, const AttackObjective& objective,
                              const ImageTensor& x);

/// Seeded low-frequency field: per channel, a sum of `terms` random 2-D cosines,
/// normalised to unit RMS over the whole tensor.
std::vector<double> low_frequency_field(Dims dims, RngStream& rng, std::size_t terms = 4);

std::string_view to_string(SyntheticKind kind);
SyntheticKind parse_synthetic_kind(std::string_view s);

}  // namespace lup
