#pragma once

#include <functional>
#include <string>

namespace dynnet {

using WarningSink = std::function<void(const std::string&)>;

// Thread-safe. The default sink prints "warning: <msg>" to stderr.
void warn(const std::string& message);

// Returns the previous sink. Passing an empty function restores the default.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace dynnet
