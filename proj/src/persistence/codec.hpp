#pragma once

#include <json.hpp>

#include "domain/types.hpp"

// JSON record codecs for the domain types. Field names are the documented
// on-disk and wire names; see README "File formats".
namespace part::persistence {

nlohmann::json to_json(const Message& m);
Message message_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ProfileEntry& e);
ProfileEntry entry_from_json(const nlohmann::json& j);

nlohmann::json to_json(const UserProfile& p);
UserProfile profile_from_json(const nlohmann::json& j);

}  // namespace part::persistence
