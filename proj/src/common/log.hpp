#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <string_view>

namespace part::log {

enum class Level { debug = 0, info, warn, error, off };

using Sink = std::function<void(Level, std::string_view)>;

void set_level(Level level);
Level level();

// Replaces the output sink (default: stderr). Passing an empty function
// restores the default.
void set_sink(Sink sink);

void write(Level level, std::string_view message);

template <typename... Args>
void emit(Level lvl, const Args&... args)
{
    if (lvl < level()) return;
    std::ostringstream out;
    (out << ... << args);
    write(lvl, out.str());
}

template <typename... Args> void debug(const Args&... args) { emit(Level::debug, args...); }
template <typename... Args> void info(const Args&... args) { emit(Level::info, args...); }
template <typename... Args> void warn(const Args&... args) { emit(Level::warn, args...); }
template <typename... Args> void error(const Args&... args) { emit(Level::error, args...); }

}  // namespace part::log
