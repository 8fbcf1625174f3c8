#pragma once

namespace forumdiv {
inline constexpr const char* kVersion = "0.1.0";
}
