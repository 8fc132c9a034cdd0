#pragma once

#include <string_view>

namespace prosocial {

inline constexpr std::string_view kToolName = "prosocial";
inline constexpr std::string_view kVersion = "1.0.0";

}  // namespace prosocial
