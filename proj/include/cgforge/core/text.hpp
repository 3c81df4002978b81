#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cgforge::text {

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace cgforge::text
