#pragma once

namespace hiflow {

inline constexpr const char* kToolName = "hiflow";
inline constexpr const char* kToolVersion = "0.3.0";

}  // namespace hiflow
