#include "depthforge/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace depthforge {

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("DEPTHFORGE_LOG");
        if (!env) return LogLevel::error;
        if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
        if (std::strcmp(env, "info") == 0) return LogLevel::info;
        return LogLevel::error;
    }();
    return level;
}

namespace {
void emit(const char* tag, const std::string& msg) {
    std::fprintf(stderr, "[depthforge %s] %s\n", tag, msg.c_str());
}
}  // namespace

void log_error(const std::string& msg) { emit("error", msg); }

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) emit("info", msg);
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) emit("debug", msg);
}

}  // namespace depthforge
