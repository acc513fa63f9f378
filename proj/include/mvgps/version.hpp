#pragma once

namespace mvgps {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mvgps
