#pragma once

namespace carsel {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace carsel
