#pragma once

#include <map>
#include <string>
#include <string_view>

namespace simlearner::detail {

// Defined in the generated embedded_assets.cpp.
const std::map<std::string, std::string_view>& embedded_assets();

}  // namespace simlearner::detail
