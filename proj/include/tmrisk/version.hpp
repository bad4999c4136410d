#pragma once

namespace tmrisk {

inline constexpr const char* kToolName = "tmrisk";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace tmrisk
