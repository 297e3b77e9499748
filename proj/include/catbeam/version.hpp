#pragma once

namespace catbeam {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace catbeam
