#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace rnls::toml_lite {

// Small TOML subset sufficient for experiment configs: [sections],
// key = value with strings, booleans, numbers, and flat arrays. Keys are
// flattened to "section.key".
using Value = std::variant<bool, double, std::string, std::vector<double>,
                           std::vector<std::string>>;
using Table = std::map<std::string, Value>;

Table parse_string(const std::string& text);
Table parse_file(const std::filesystem::path& path);

} // namespace rnls::toml_lite
