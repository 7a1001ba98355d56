#include "persistence/profile_store.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "common/error.hpp"
#include "common/random.hpp"
#include "common/text.hpp"
#include "persistence/codec.hpp"

namespace part::persistence {
namespace {

std::string escape_filename(const std::string& user_id)
{
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : user_id) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    if (out.empty() || out == "." || out == "..") out = "%" + out;
    return out;
}

std::string checksum(const std::string& user_id, std::uint64_t version, const std::string& entry_lines)
{
    const std::string payload = user_id + "\n" + std::to_string(version) + "\n" + entry_lines;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(payload)));
    return std::string("fnv1a64:") + buf;
}

std::int64_t now_ms()
{
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace

UserProfile ProfileStore::update(const std::string& user_id,
                                 const std::function<UserProfile(const UserProfile&)>& mutate)
{
    for (int attempt = 0;; ++attempt) {
        const UserProfile current = load(user_id);
        UserProfile next = mutate(current);
        next.user_id = user_id;
        if (next.version == current.version) return current;
        try {
            store(next);
            return next;
        } catch (const StaleVersion&) {
            if (attempt >= 16) throw;
            std::this_thread::yield();
        }
    }
}

UserProfile MemoryProfileStore::load(const std::string& user_id) const
{
    std::lock_guard lock(mutex_);
    const auto it = profiles_.find(user_id);
    if (it != profiles_.end()) return it->second;
    UserProfile p;
    p.user_id = user_id;
    return p;
}

void MemoryProfileStore::store(const UserProfile& profile)
{
    std::lock_guard lock(mutex_);
    auto& slot = profiles_[profile.user_id];
    if (slot.user_id.empty()) slot.user_id = profile.user_id;
    if (profile.version <= slot.version) throw StaleVersion(slot.version, profile.version);
    slot = profile;
}

FileProfileStore::FileProfileStore(std::filesystem::path root) : dir_(std::move(root) / "profiles")
{
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create profile directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path FileProfileStore::path_for(const std::string& user_id) const
{
    return dir_ / (escape_filename(user_id) + ".jsonl");
}

std::mutex& FileProfileStore::lock_for(const std::string& user_id)
{
    std::lock_guard lock(locks_mutex_);
    auto& slot = locks_[user_id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

UserProfile FileProfileStore::load(const std::string& user_id) const
{
    const auto path = path_for(user_id);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        UserProfile p;
        p.user_id = user_id;
        return p;
    }
    auto corrupt = [&](const std::string& why) {
        return Error(ErrorCode::storage_corrupt, "profile of " + user_id + " is corrupt: " + why);
    };

    std::string header_line;
    if (!std::getline(in, header_line)) throw corrupt("empty file");
    std::string entry_lines;
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        entry_lines += line + "\n";
        lines.push_back(std::move(line));
    }

    try {
        const auto header = nlohmann::json::parse(header_line);
        if (header.value("kind", "") != "profile") throw corrupt("bad header");
        UserProfile p;
        p.user_id = header.at("user_id").get<std::string>();
        p.version = header.at("version").get<std::uint64_t>();
        if (p.user_id != user_id) throw corrupt("user id mismatch");
        if (header.at("entry_count").get<std::size_t>() != lines.size()) throw corrupt("entry count mismatch");
        if (header.at("checksum").get<std::string>() != checksum(p.user_id, p.version, entry_lines))
            throw corrupt("checksum mismatch");
        for (const auto& line : lines) p.entries.push_back(entry_from_json(nlohmann::json::parse(line)));
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw corrupt(e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::storage_corrupt) throw;
        throw corrupt(e.what());
    }
}

void FileProfileStore::store(const UserProfile& profile)
{
    if (profile.user_id.empty()) throw Error(ErrorCode::invalid_argument, "profile without user id");
    std::lock_guard lock(lock_for(profile.user_id));

    const UserProfile current = load(profile.user_id);
    if (profile.version <= current.version) throw StaleVersion(current.version, profile.version);

    std::string entry_lines;
    for (const auto& e : profile.entries) entry_lines += to_json(e).dump() + "\n";
    const nlohmann::json header = {
        {"kind", "profile"},
        {"user_id", profile.user_id},
        {"version", profile.version},
        {"written_at", now_ms()},
        {"entry_count", profile.entries.size()},
        {"checksum", checksum(profile.user_id, profile.version, entry_lines)},
    };

    static std::atomic<std::uint64_t> counter{0};
    const auto target = path_for(profile.user_id);
    auto tmp = target;
    tmp += ".tmp." + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::io, "cannot write " + tmp.string());
        out << header.dump() << '\n' << entry_lines;
        out.flush();
        if (!out) throw Error(ErrorCode::io, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::io, "cannot replace " + target.string());
    }
}

}  // namespace part::persistence
