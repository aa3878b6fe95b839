#pragma once

namespace flowmap {

inline constexpr const char* kVersion = "flowmap 0.1.0";

}  // namespace flowmap
