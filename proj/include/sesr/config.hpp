#pragma once

#include <map>
#include <string>

namespace sesr {

// Flat `key = value` text with optional `[section]` headers. Keys inside a
// section are reported as "section.key". '#' and ';' start comments.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> load_config_file(const std::string& path);

}  // namespace sesr
