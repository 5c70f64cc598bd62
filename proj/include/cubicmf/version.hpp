#pragma once

namespace cubicmf {

inline constexpr const char* kToolName = "cubicmf";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace cubicmf
