#pragma once

namespace vlf {
inline constexpr const char* kVersion = "0.1.0";
}
