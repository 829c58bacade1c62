// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace flowbench {

inline constexpr const char* kToolName = "flowbench";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace flowbench
