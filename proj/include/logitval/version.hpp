#pragma once

namespace logitval {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace logitval
