#include "persistence/codec.hpp"

#include "common/error.hpp"

namespace part::persistence {
namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::invalid_argument, std::string("missing field ") + key);
    return j.at(key);
}

template <class F>
auto decoding(const char* what, F&& f)
{
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("bad ") + what + ": " + e.what());
    }
}

}  // namespace

nlohmann::json to_json(const Message& m)
{
    return {{"role", to_string(m.role)}, {"text", m.text}, {"timestamp", m.timestamp}};
}

Message message_from_json(const nlohmann::json& j)
{
    return decoding("message", [&] {
        const auto role = parse_role(require(j, "role").get<std::string>());
        if (!role) throw Error(ErrorCode::invalid_argument, "unknown role");
        Timestamp ts = j.contains("timestamp") ? j["timestamp"].get<Timestamp>() : 0;
        return make_message(*role, require(j, "text").get<std::string>(), ts);
    });
}

nlohmann::json to_json(const ProfileEntry& e)
{
    return {{"topic", e.topic},
            {"detail", e.detail},
            {"source", to_string(e.source)},
            {"updated_at", e.updated_at},
            {"confidence", e.confidence}};
}

ProfileEntry entry_from_json(const nlohmann::json& j)
{
    return decoding("profile entry", [&] {
        ProfileEntry e;
        e.topic = require(j, "topic").get<std::string>();
        if (e.topic.empty()) throw Error(ErrorCode::invalid_argument, "profile entry with empty topic");
        e.detail = j.value("detail", std::string());
        if (j.contains("source")) {
            const auto src = parse_entry_source(j["source"].get<std::string>());
            if (!src) throw Error(ErrorCode::invalid_argument, "unknown entry source");
            e.source = *src;
        }
        e.updated_at = j.value("updated_at", Timestamp{0});
        e.confidence = j.value("confidence", 1.0);
        if (!(e.confidence >= 0.0 && e.confidence <= 1.0))
            throw Error(ErrorCode::invalid_argument, "confidence outside [0, 1]");
        return e;
    });
}

nlohmann::json to_json(const UserProfile& p)
{
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : p.entries) entries.push_back(to_json(e));
    return {{"user_id", p.user_id}, {"version", p.version}, {"entries", entries}};
}

UserProfile profile_from_json(const nlohmann::json& j)
{
    return decoding("profile", [&] {
        UserProfile p;
        p.user_id = j.value("user_id", std::string());
        p.version = j.value("version", std::uint64_t{0});
        if (j.contains("entries"))
            for (const auto& e : j["entries"]) p.entries.push_back(entry_from_json(e));
        return p;
    });
}

}  // namespace part::persistence
