#include "bbgan/logging.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace bbgan {

namespace {
spdlog::logger& logger() {
  static auto instance = [] {
    auto l = spdlog::stderr_color_mt("bbgan");
    l->set_pattern("[%H:%M:%S] [%^%l%$] %v");
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return *instance;
}
}  // namespace

void set_verbosity(Verbosity level) {
  switch (level) {
    case Verbosity::Quiet: logger().set_level(spdlog::level::off); break;
    case Verbosity::Warnings: logger().set_level(spdlog::level::warn); break;
    case Verbosity::Info: logger().set_level(spdlog::level::info); break;
    case Verbosity::Debug: logger().set_level(spdlog::level::debug); break;
  }
}

void log_info(std::string_view message) { logger().info("{}", message); }
void log_warning(std::string_view message) { logger().warn("{}", message); }
void log_debug(std::string_view message) { logger().debug("{}", message); }

}  // namespace bbgan
