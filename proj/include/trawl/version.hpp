#pragma once

namespace trawl {
inline constexpr const char* version = "0.1.0";
}
