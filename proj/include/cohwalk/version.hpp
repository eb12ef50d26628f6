#pragma once

namespace cohwalk {

inline constexpr const char* version = "0.1.0";

} // namespace cohwalk
