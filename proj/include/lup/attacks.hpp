#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lup/objective.hpp"
#include "lup/oracle.hpp"
#include "lup/rng.hpp"

namespace lup {

struct TracePoint {
  std::uint64_t query_index = 0;  // ledger count right after the query that produced `loss`
  double loss = 0.0;
};

struct AttackOutcome {
  ImageTensor eta;
  std::uint64_t queries_used = 0;
  bool success = false;
  double final_loss = 0.0;
  std::vector<TracePoint> loss_trace;
  /// Only meaningful for the LUP exploitation phase.
  bool fallback_engaged = false;
  std::uint64_t fallback_at_query = 0;
};

// ---------------------------------------------------------------------------------------
// Candidate vectors for the local-search attacks.

/// A unit vector: either one coordinate of the pixel basis or a dense image.
class Candidate {
 public:
  static Candidate pixel(std::size_t index) { return Candidate(index, nullptr); }
  static Candidate dense(const ImageTensor& direction) { return Candidate(0, &direction); }

  bool is_pixel() const { return dense_ == nullptr; }
  std::size_t pixel_index() const { return index_; }
  const ImageTensor* direction() const { return dense_; }

  /// t += alpha * q
  void add_to(ImageTensor& t, float alpha) const;

 private:
  Candidate(std::size_t index, const ImageTensor* dense) : index_(index), dense_(dense) {}
  std::size_t index_;
  const ImageTensor* dense_;
};

/// Ordered supply of candidates, consumed without replacement.
class CandidateSource {
 public:
  virtual ~CandidateSource() = default;
  virtual std::optional<Candidate> next() = 0;
};

/// One unit vector per (channel, row, col) coordinate, in a seeded uniform shuffle.
class PixelBasisSource final : public CandidateSource {
 public:
  PixelBasisSource(Dims dims, RngStream rng);
  std::optional<Candidate> next() override;
  std::size_t remaining() const { return order_.size() - cursor_; }

 private:
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// Dense directions in their stored order. The caller keeps `directions` alive.
class ComponentSource final : public CandidateSource {
 public:
  explicit ComponentSource(std::span<const ImageTensor> directions) : directions_(directions) {}
  std::optional<Candidate> next() override;

 private:
  std::span<const ImageTensor> directions_;
  std::size_t cursor_ = 0;
};

// ---------------------------------------------------------------------------------------
// IT-NES

struct NesConfig {
  std::size_t samples = 50;  // n, even
  double sigma = 0.01;
  double step = 0.01;        // epsilon
  std::optional<double> per_step_clip;  // L-infinity bound on eta

  void validate() const;
};

/// Antithetic NES estimate of grad L(G(point), r) from exactly `samples` queries.
/// Returns std::nullopt, without issuing any query, when fewer than `samples` remain.
std::optional<ImageTensor> nes_gradient_estimate(const Oracle& oracle, QueryLedger& ledger,
                                                 const AttackObjective& objective,
                                                 const ImageTensor& point, const NesConfig& cfg,
                                                 RngStream& rng);

AttackOutcome it_nes_attack(const Oracle& oracle, QueryLedger& ledger,
                            const AttackObjective& objective, const ImageTensor& x,
                            const NesConfig& cfg, RngStream rng);

// ---------------------------------------------------------------------------------------
// IT-SimBA

struct SimbaConfig {
  double step = 0.4;  // xi
  RngStream rng{};    // shuffles the pixel basis

  void validate() const;
};

AttackOutcome it_simba_attack(const Oracle& oracle, QueryLedger& ledger,
                              const AttackObjective& objective, const ImageTensor& x,
                              const SimbaConfig& cfg);

/// IT-SimBA over an explicit candidate stream.
AttackOutcome it_simba_attack(const Oracle& oracle, QueryLedger& ledger,
                              const AttackObjective& objective, const ImageTensor& x, double step,
                              CandidateSource& candidates);

// ---------------------------------------------------------------------------------------
// IT-Bandits-TD

enum class BanditsImageStep { sign, l2 };
enum class BanditsPriorUpdate { gradient, exponentiated };

struct BanditsConfig {
  double prior_lr = 0.1;
  double image_lr = 0.01;
  double exploration = 0.1;
  std::size_t tile = 4;
  double fd_eta = 0.1;
  BanditsImageStep image_step = BanditsImageStep::sign;
  BanditsPriorUpdate prior_update = BanditsPriorUpdate::gradient;

  void validate(Dims dims) const;
};

AttackOutcome it_bandits_attack(const Oracle& oracle, QueryLedger& ledger,
                                const AttackObjective& objective, const ImageTensor& x,
                                const BanditsConfig& cfg, RngStream rng);

/// Nearest-neighbour upsampling of a (C, H/tile, W/tile) prior to (C, H, W).
ImageTensor upsample_tiles(const ImageTensor& prior, std::size_t tile);

namespace detail {

/// L(G(input), r) through the ledger; std::nullopt when the budget is spent.
std::optional<double> probe_loss(const Oracle& oracle, QueryLedger& ledger,
                                 const AttackObjective& objective, const ImageTensor& input);

}  // namespace detail
}  // namespace lup
