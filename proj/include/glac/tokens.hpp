#pragma once

#include <cstddef>

namespace glac {

// Reserved vocabulary ids, fixed across every model and checkpoint.
inline constexpr int kPadId = 0;
inline constexpr int kStartId = 1;
inline constexpr int kEndId = 2;
inline constexpr int kUnkId = 3;
inline constexpr size_t kReservedTokens = 4;

} // namespace glac
