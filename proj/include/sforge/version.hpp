// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

namespace sforge {

std::string_view library_version();

}  // namespace sforge
