// SPDX-License-Identifier: MIT
#pragma once

namespace migsys {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace migsys
