#pragma once

#include <string_view>
#include <vector>

namespace molforge::data {

// Contents of a data file shipped under data/ and compiled into the library.
// Throws std::out_of_range for unknown names.
std::string_view embedded(std::string_view name);

std::vector<std::string_view> embedded_names();

}  // namespace molforge::data
