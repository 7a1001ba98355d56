#include "common/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace part::log {
namespace {

std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;
Sink g_sink;

const char* tag(Level lvl)
{
    switch (lvl) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
    case Level::off: break;
    }
    return "";
}

}  // namespace

void set_level(Level lvl) { g_level = lvl; }
Level level() { return g_level; }

void set_sink(Sink sink)
{
    std::lock_guard lock(g_mutex);
    g_sink = std::move(sink);
}

void write(Level lvl, std::string_view message)
{
    if (lvl < g_level || lvl == Level::off) return;
    std::lock_guard lock(g_mutex);
    if (g_sink) {
        g_sink(lvl, message);
        return;
    }
    std::cerr << "[part " << tag(lvl) << "] " << message << '\n';
}

}  // namespace part::log
