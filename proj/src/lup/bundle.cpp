#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "lup/btf.hpp"
#include "lup/lup.hpp"

namespace lup {
namespace {

std::string component_file(std::size_t i) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "component_%04zu.btf", i);
  return buf;
}

}  // namespace

void save_bundle(const std::filesystem::path& dir, const PrincipalComponents& pcs,
                 const BundleManifest& manifest) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json j;
  j["dims"] = {manifest.dims.channels, manifest.dims.height, manifest.dims.width};
  j["count"] = pcs.components.size();
  j["explained_variance"] = pcs.explained_variance;
  j["leak_queries"] = manifest.leak_queries;
  j["source_attack"] = manifest.source_attack;
  j["seed"] = manifest.seed;
  for (std::size_t i = 0; i < pcs.components.size(); ++i) {
    btf::write_file(dir / component_file(i), pcs.components[i]);
  }
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << j.dump(2) << '\n';
}

ComponentBundle load_bundle(const std::filesystem::path& dir, ValueRange range) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ConfigError("no component bundle manifest at " + dir.string());
  ComponentBundle bundle;
  std::size_t count = 0;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto& d = j.at("dims");
    bundle.manifest.dims = Dims{d.at(0).get<std::size_t>(), d.at(1).get<std::size_t>(),
                                d.at(2).get<std::size_t>()};
    count = j.at("count").get<std::size_t>();
    bundle.manifest.explained_variance = j.at("explained_variance").get<std::vector<double>>();
    bundle.manifest.leak_queries = j.at("leak_queries").get<std::uint64_t>();
    bundle.manifest.source_attack = j.at("source_attack").get<std::string>();
    bundle.manifest.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed bundle manifest: " + std::string(e.what()));
  }
  if (bundle.manifest.explained_variance.size() != count) {
    throw ConfigError("bundle manifest count does not match explained_variance length");
  }
  for (std::size_t i = 0; i < count; ++i) {
    ImageTensor c = btf::read_file(dir / component_file(i), range);
    if (c.dims() != bundle.manifest.dims) throw ShapeError("bundle component dims mismatch");
    bundle.components.push_back(std::move(c));
  }
  return bundle;
}

}  // namespace lup
