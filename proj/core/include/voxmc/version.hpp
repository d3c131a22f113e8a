#pragma once

namespace voxmc {
inline constexpr const char* kVersion = "0.1.0";
}
