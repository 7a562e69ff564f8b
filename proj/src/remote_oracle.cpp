#include "lup/remote_oracle.hpp"

#include <httplib.h>

#include <json.hpp>

#include "lup/btf.hpp"

namespace lup {
namespace {

Dims parse_dims(const nlohmann::json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_array() || j[field].size() != 3) {
    throw TransportError(std::string("/v1/info field '") + field + "' must be [C,H,W]");
  }
  const auto& a = j[field];
  return Dims{a[0].get<std::size_t>(), a[1].get<std::size_t>(), a[2].get<std::size_t>()};
}

std::unique_ptr<httplib::Client> make_client(const std::string& host, double timeout) {
  auto client = std::make_unique<httplib::Client>(host);
  const auto secs = static_cast<time_t>(timeout);
  const auto usecs = static_cast<time_t>((timeout - static_cast<double>(secs)) * 1e6);
  client->set_connection_timeout(secs, usecs);
  client->set_read_timeout(secs, usecs);
  client->set_write_timeout(secs, usecs);
  return client;
}

}  // namespace

RemoteOracle::RemoteOracle(std::string endpoint, RemoteOracleOptions options)
    : endpoint_(std::move(endpoint)), options_(options) {
  const auto scheme = endpoint_.find("://");
  const auto path_start = endpoint_.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  host_ = endpoint_.substr(0, path_start);
  if (path_start != std::string::npos) base_path_ = endpoint_.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();

  auto client = make_client(host_, options_.timeout_seconds);
  httplib::Result res;
  for (int attempt = 0; attempt <= options_.retries && !res; ++attempt) {
    res = client->Get(base_path_ + "/v1/info");
  }
  if (!res) {
    throw TransportError("GET " + endpoint_ + "/v1/info failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("GET /v1/info returned status " + std::to_string(res->status));
  }
  try {
    const auto info = nlohmann::json::parse(res->body);
    input_dims_ = parse_dims(info, "input_dims");
    output_dims_ = parse_dims(info, "output_dims");
    const auto& vr = info.at("value_range");
    range_ = ValueRange{vr.at(0).get<double>(), vr.at(1).get<double>()};
    name_ = info.value("name", std::string("remote"));
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed /v1/info response: ") + e.what());
  }
  if (!(range_.lo < range_.hi)) throw TransportError("/v1/info value_range must satisfy lo < hi");
}

ImageTensor RemoteOracle::query(const ImageTensor& x) const {
  if (x.dims() != input_dims_) throw ShapeError("remote oracle input dims mismatch");
  const auto frame = btf::encode(x);
  const std::string body(frame.begin(), frame.end());
  // A fresh client per call keeps query() safe under concurrent attacks.
  auto client = make_client(host_, options_.timeout_seconds);
  httplib::Result res;
  for (int attempt = 0; attempt <= options_.retries && !res; ++attempt) {
    res = client->Post(base_path_ + "/v1/translate", body, "application/octet-stream");
  }
  if (!res) {
    throw TransportError("POST /v1/translate failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("POST /v1/translate returned status " + std::to_string(res->status) +
                         ": " + res->body);
  }
  const auto* p = reinterpret_cast<const std::uint8_t*>(res->body.data());
  ImageTensor out = btf::decode(std::span<const std::uint8_t>(p, res->body.size()), range_);
  if (out.dims() != output_dims_) {
    throw TransportError("response dims " + out.dims().to_string() + " differ from /v1/info " +
                         output_dims_.to_string());
  }
  return out;
}

OracleHandle remote_oracle(const std::string& endpoint, RemoteOracleOptions options) {
  return std::make_shared<RemoteOracle>(endpoint, options);
}

}  // namespace lup
