#pragma once

#include <string_view>

namespace tse {

#ifdef TSEKIT_VERSION
inline constexpr std::string_view kToolVersion = TSEKIT_VERSION;
#else
inline constexpr std::string_view kToolVersion = "0.0.0";
#endif

}  // namespace tse
