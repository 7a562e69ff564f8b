#include "lup/oracle.hpp"

namespace lup {

QueryLedger::QueryLedger(std::uint64_t budget) : budget_(budget) {
  if (budget == 0) throw ConfigError("query budget must be at least 1");
}

std::optional<ImageTensor> budgeted_query(QueryLedger& ledger, const Oracle& oracle,
                                          const ImageTensor& x) {
  if (x.dims() != oracle.input_dims()) {
    throw ShapeError("oracle expects input " + oracle.input_dims().to_string() + ", got " +
                     x.dims().to_string());
  }
  if (ledger.exhausted()) return std::nullopt;
  ++ledger.count_;
  ImageTensor out = oracle.query(clip_to_range(x, oracle.value_range()));
  if (out.dims() != oracle.output_dims()) {
    throw ShapeError("oracle returned " + out.dims().to_string() + ", declared " +
                     oracle.output_dims().to_string());
  }
  return out;
}

}  // namespace lup
