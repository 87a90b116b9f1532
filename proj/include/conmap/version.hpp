#pragma once

namespace conmap {

inline constexpr const char* version = "0.1.0";

}  // namespace conmap
