#include <numeric>

#include "lup/attacks.hpp"

namespace lup {

void Candidate::add_to(ImageTensor& t, float alpha) const {
  if (dense_ != nullptr) {
    t.add_scaled(alpha, *dense_);
  } else {
    t[index_] += alpha;
  }
}

PixelBasisSource::PixelBasisSource(Dims dims, RngStream rng) : order_(dims.size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order_));
}

std::optional<Candidate> PixelBasisSource::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  return Candidate::pixel(order_[cursor_++]);
}

std::optional<Candidate> ComponentSource::next() {
  if (cursor_ >= directions_.size()) return std::nullopt;
  return Candidate::dense(directions_[cursor_++]);
}

namespace detail {

std::optional<double> probe_loss(const Oracle& oracle, QueryLedger& ledger,
                                 const AttackObjective& objective, const ImageTensor& input) {
  auto out = budgeted_query(ledger, oracle, input);
  if (!out) return std::nullopt;
  return objective.loss_of(*out);
}

}  // namespace detail
}  // namespace lup
