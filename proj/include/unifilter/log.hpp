#pragma once

#include <functional>
#include <string>

namespace unifilter {

using LogSink = std::function<void(const std::string&)>;

/// Replaces the warning sink (default: std::clog). Returns the previous one.
LogSink set_warning_sink(LogSink sink);

void warn(const std::string& message);

}  // namespace unifilter
