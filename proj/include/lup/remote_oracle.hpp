#pragma once

#include <memory>
#include <string>

#include "lup/oracle.hpp"

namespace lup {

struct RemoteOracleOptions {
  double timeout_seconds = 30.0;
  int retries = 0;  // extra attempts after a connection failure
};

/// Oracle served over HTTP:
///   GET  {endpoint}/v1/info       -> JSON {"input_dims", "output_dims", "value_range", "name"}
///   POST {endpoint}/v1/translate  -> BTF1 frame in, BTF1 frame out
///
/// The constructor fetches /v1/info and throws TransportError if that fails.
class RemoteOracle final : public Oracle {
 public:
  explicit RemoteOracle(std::string endpoint, RemoteOracleOptions options = {});

  Dims input_dims() const override { return input_dims_; }
  Dims output_dims() const override { return output_dims_; }
  ValueRange value_range() const override { return range_; }
  std::string name() const override { return name_; }
  ImageTensor query(const ImageTensor& x) const override;

  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
  std::string host_;
  std::string base_path_;
  RemoteOracleOptions options_;
  Dims input_dims_{};
  Dims output_dims_{};
  ValueRange range_{};
  std::string name_;
};

OracleHandle remote_oracle(const std::string& endpoint, RemoteOracleOptions options = {});

}  // namespace lup
