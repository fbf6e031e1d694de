#include "milo/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace milo::log {

namespace {

Level parse_env() {
    const char* env = std::getenv("MILO_LOG");
    if (env == nullptr) return Level::Error;
    const std::string value(env);
    if (value == "debug") return Level::Debug;
    if (value == "info") return Level::Info;
    return Level::Error;
}

std::mutex& io_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

Level threshold() {
    static const Level level = parse_env();
    return level;
}

void write(Level level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(threshold())) return;
    const char* tag = level == Level::Error ? "error" : level == Level::Info ? "info" : "debug";
    std::lock_guard<std::mutex> lock(io_mutex());
    std::cerr << "[milo:" << tag << "] " << message << '\n';
}

}  // namespace milo::log
