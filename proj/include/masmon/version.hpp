#pragma once

namespace masmon {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace masmon
