#pragma once

namespace shrinkcov {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace shrinkcov
