#pragma once

namespace kappatune {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kappatune
