#pragma once

namespace edo {

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace edo
