#include "config_file.hpp"

#include <fstream>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml++/toml.hpp>

#include "lup/error.hpp"

namespace lup::detail {
namespace {

nlohmann::json convert(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    auto obj = nlohmann::json::object();
    for (const auto& [key, value] : *t) obj[std::string(key.str())] = convert(value);
    return obj;
  }
  if (const auto* a = node.as_array()) {
    auto arr = nlohmann::json::array();
    for (const auto& value : *a) arr.push_back(convert(value));
    return arr;
  }
  if (const auto* s = node.as_string()) return s->get();
  if (const auto* i = node.as_integer()) return i->get();
  if (const auto* f = node.as_floating_point()) return f->get();
  if (const auto* b = node.as_boolean()) return b->get();
  // Dates and times have no config meaning; keep their text form.
  std::ostringstream text;
  node.visit([&](const auto& n) { text << n; });
  return text.str();
}

}  // namespace

nlohmann::json read_config_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  if (path.extension() == ".toml") {
    try {
      return convert(toml::parse(in, path.string()));
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << "config " << path.string() << " is not valid TOML: " << e.description() << " at line "
          << e.source().begin.line;
      throw ConfigError(msg.str());
    }
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace lup::detail
