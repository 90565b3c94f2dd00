#pragma once

namespace stcf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stcf
