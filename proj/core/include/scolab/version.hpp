#pragma once

namespace scolab {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace scolab
