#pragma once

namespace prmcc {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace prmcc
