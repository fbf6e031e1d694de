#pragma once

#include <string>

namespace milo::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

/// Threshold from the MILO_LOG environment variable (error|info|debug);
/// defaults to error.
Level threshold();

void write(Level level, const std::string& message);

inline void error(const std::string& message) { write(Level::Error, message); }
inline void info(const std::string& message) { write(Level::Info, message); }
inline void debug(const std::string& message) { write(Level::Debug, message); }

}  // namespace milo::log
