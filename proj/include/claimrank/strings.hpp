#pragma once

#include <string>
#include <vector>

namespace claimrank {

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);
std::string join(const std::vector<std::string>& parts, const std::string& sep);

// Number of Unicode code points in a UTF-8 string (continuation bytes are not counted).
std::size_t utf8_length(const std::string& s);

}  // namespace claimrank
