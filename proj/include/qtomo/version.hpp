#pragma once

namespace qtomo {

inline constexpr const char* kVersion = "0.1.0";

} // namespace qtomo
