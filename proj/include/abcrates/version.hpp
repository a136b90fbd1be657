#pragma once

namespace abcr {

inline constexpr const char* kVersion = "abc-rates 0.1.0";

}  // namespace abcr
