#pragma once

#include <filesystem>

#include <json.hpp>

namespace lup::detail {

// Parses a campaign config file into a JSON tree. Files ending in .toml are read as TOML
// and converted; everything else is parsed as JSON. Throws ConfigError.
nlohmann::json read_config_tree(const std::filesystem::path& path);

}  // namespace lup::detail
