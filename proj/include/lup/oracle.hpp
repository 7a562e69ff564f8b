#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "lup/tensor.hpp"

namespace lup {

/// Black-box image translation generator G.
///
/// Implementations must be deterministic and safe to query from several threads at once.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual Dims input_dims() const = 0;
  virtual Dims output_dims() const = 0;
  virtual ValueRange value_range() const = 0;
  virtual std::string name() const = 0;

  /// One evaluation of G. Callers outside this module go through budgeted_query.
  virtual ImageTensor query(const ImageTensor& x) const = 0;
};

using OracleHandle = std::shared_ptr<const Oracle>;

/// Per-attack query counter Q against a budget B.
class QueryLedger {
 public:
  explicit QueryLedger(std::uint64_t budget);

  std::uint64_t count() const { return count_; }
  std::uint64_t budget() const { return budget_; }
  std::uint64_t remaining() const { return budget_ - count_; }
  bool exhausted() const { return count_ >= budget_; }

 private:
  friend std::optional<ImageTensor> budgeted_query(QueryLedger&, const Oracle&, const ImageTensor&);
  std::uint64_t count_ = 0;
  std::uint64_t budget_;
};

/// Clips x into the oracle's value range and evaluates G once, or returns std::nullopt
/// without touching G when the ledger has no budget left.
std::optional<ImageTensor> budgeted_query(QueryLedger& ledger, const Oracle& oracle,
                                          const ImageTensor& x);

/// Pass-through wrapper that counts evaluations of the wrapped oracle.
class CountingOracle final : public Oracle {
 public:
  explicit CountingOracle(OracleHandle inner) : inner_(std::move(inner)) {}

  Dims input_dims() const override { return inner_->input_dims(); }
  Dims output_dims() const override { return inner_->output_dims(); }
  ValueRange value_range() const override { return inner_->value_range(); }
  std::string name() const override { return inner_->name(); }
  ImageTensor query(const ImageTensor& x) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_->query(x);
  }

  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }
  void reset() { calls_.store(0, std::memory_order_relaxed); }

 private:
  OracleHandle inner_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

}  // namespace lup
