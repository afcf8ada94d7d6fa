// Copyright 2026 The SDRCNN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

namespace sdrcnn {

using WarningSink = std::function<void(const std::string&)>;

/// Emits a non-fatal diagnostic. Defaults to stderr with a "warning: " prefix.
void warn(const std::string& message);

/// Replaces the sink; returns the previous one. An empty sink restores stderr.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace sdrcnn
