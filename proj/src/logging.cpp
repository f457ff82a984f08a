#include "fidvr/logging.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

namespace fidvr::log {

namespace {

Level parse_level() {
    const char* env = std::getenv("FIDVR_LOG");
    if (env == nullptr) return Level::warn;
    const std::string value(env);
    if (value == "debug") return Level::debug;
    if (value == "info") return Level::info;
    if (value == "warn") return Level::warn;
    if (value == "error") return Level::error;
    if (value == "off") return Level::off;
    return Level::warn;
}

const char* tag(Level level) {
    switch (level) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
        default: return "?";
    }
}

}  // namespace

Level threshold() {
    static const Level cached = parse_level();
    return cached;
}

void write(Level level, std::string_view message) {
    if (level < threshold()) return;
    std::fprintf(stderr, "[fidvr %s] %.*s\n", tag(level), static_cast<int>(message.size()),
                 message.data());
}

}  // namespace fidvr::log
