#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "domain/types.hpp"

namespace part::persistence {

// Port for profile storage. A key-value server adapter implements the same
// interface.
class ProfileStore {
public:
    virtual ~ProfileStore() = default;

    // Unknown users get an empty profile with version 0.
    virtual UserProfile load(const std::string& user_id) const = 0;

    // Optimistic write: requires profile.version > stored version, otherwise
    // throws StaleVersion.
    virtual void store(const UserProfile& profile) = 0;

    // Atomic read-modify-write. `mutate` returns the new profile; when its
    // version is unchanged nothing is written. Retries on StaleVersion.
    UserProfile update(const std::string& user_id, const std::function<UserProfile(const UserProfile&)>& mutate);
};

class MemoryProfileStore : public ProfileStore {
public:
    UserProfile load(const std::string& user_id) const override;
    void store(const UserProfile& profile) override;

private:
    mutable std::mutex mutex_;
    std::map<std::string, UserProfile> profiles_;
};

// One file per user under <root>/profiles/, replaced atomically by writing a
// temp file and renaming it. File layout (JSON Lines):
//   line 1: {"kind":"profile","user_id":..,"version":..,"written_at":..,
//            "entry_count":..,"checksum":"fnv1a64:<16 hex>"}
//   line 2+: one ProfileEntry record per line
// The checksum covers user_id, version and the entry lines.
class FileProfileStore : public ProfileStore {
public:
    explicit FileProfileStore(std::filesystem::path root);

    // Throws storage_corrupt when the file fails to parse or its checksum
    // does not match.
    UserProfile load(const std::string& user_id) const override;
    void store(const UserProfile& profile) override;

    std::filesystem::path path_for(const std::string& user_id) const;

private:
    std::mutex& lock_for(const std::string& user_id);

    std::filesystem::path dir_;
    std::mutex locks_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

}  // namespace part::persistence
