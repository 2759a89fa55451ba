#pragma once

#include <string_view>

namespace bbgan {

enum class Verbosity { Quiet, Warnings, Info, Debug };

// Progress and warnings go to stderr; machine-readable output never does.
void set_verbosity(Verbosity level);
void log_info(std::string_view message);
void log_warning(std::string_view message);
void log_debug(std::string_view message);

}  // namespace bbgan
