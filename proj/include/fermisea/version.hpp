#pragma once

namespace fermisea {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace fermisea
