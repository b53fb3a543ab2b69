#pragma once

namespace nonspread {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace nonspread
