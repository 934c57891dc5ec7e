#pragma once

namespace tdefl {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSweepSchemaVersion = 1;
inline constexpr int kModelFileVersion = 1;

}  // namespace tdefl
