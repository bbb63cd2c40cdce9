#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace fsml {

using WarningHandler = std::function<void(std::string_view)>;

/// Routes non-fatal numerical warnings. The default handler prints to stderr.
/// Passing an empty handler silences warnings. Returns the previous handler.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

/// Number of warnings emitted since process start (all threads).
std::size_t warning_count();

}  // namespace fsml
