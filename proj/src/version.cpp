// Copyright 2026 The sparrow-forge Authors
// SPDX-License-Identifier: Apache-2.0

#include "sforge/version.hpp"

#ifndef SFORGE_VERSION
#define SFORGE_VERSION "0.0.0"
#endif

namespace sforge {

std::string_view library_version() { return SFORGE_VERSION; }

}  // namespace sforge
