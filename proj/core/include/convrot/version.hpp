#pragma once

namespace convrot {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace convrot
