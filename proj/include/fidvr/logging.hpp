#pragma once

#include <string_view>

namespace fidvr::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

/// Threshold parsed once from the FIDVR_LOG environment variable
/// (debug|info|warn|error|off); defaults to warn.
[[nodiscard]] Level threshold();

void write(Level level, std::string_view message);

inline void debug(std::string_view m) { write(Level::debug, m); }
inline void info(std::string_view m) { write(Level::info, m); }
inline void warn(std::string_view m) { write(Level::warn, m); }
inline void error(std::string_view m) { write(Level::error, m); }

}  // namespace fidvr::log
