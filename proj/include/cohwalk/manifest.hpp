#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohwalk/errors.hpp"
#include "cohwalk/version.hpp"

namespace cohwalk {

/// FNV-1a 64-bit content hash, hex-encoded.
inline std::string fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Record of one CLI run: config identity, tool version, seed, timestamps,
/// and a checksum per emitted file. Written as manifest.json next to the
/// outputs; the manifest itself is not listed.
class RunManifest {
public:
    RunManifest(std::string command, std::string config_path, std::string config_bytes,
                std::uint64_t seed)
        : command_(std::move(command)),
          config_path_(std::move(config_path)),
          config_hash_(fnv1a64(config_bytes)),
          seed_(seed),
          started_(std::chrono::system_clock::now()) {}

    /// Writes `bytes` into dir/name and records the file.
    void emit(const std::filesystem::path& dir, const std::string& name,
              const std::string& bytes) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::ios_base::failure("cannot open " + path.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        if (!out)
            throw std::ios_base::failure("failed writing " + path.string());
        files_.push_back({name, bytes.size(), fnv1a64(bytes)});
    }

    void write(const std::filesystem::path& dir) const {
        nlohmann::json doc;
        doc["command"] = command_;
        doc["tool_version"] = version;
        doc["config_path"] = config_path_;
        doc["config_hash_fnv1a64"] = config_hash_;
        doc["seed"] = seed_;
        doc["started_at"] = iso8601_utc(started_);
        doc["finished_at"] = iso8601_utc(std::chrono::system_clock::now());
        doc["files"] = nlohmann::json::array();
        for (const auto& f : files_) {
            doc["files"].push_back({{"name", f.name},
                                    {"bytes", f.bytes},
                                    {"fnv1a64", f.hash}});
        }
        const auto path = dir / "manifest.json";
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::ios_base::failure("cannot open " + path.string() + " for writing");
        out << doc.dump(2) << "\n";
    }

    struct FileEntry {
        std::string name;
        std::size_t bytes;
        std::string hash;
    };

    const std::vector<FileEntry>& files() const { return files_; }

private:
    std::string command_;
    std::string config_path_;
    std::string config_hash_;
    std::uint64_t seed_;
    std::chrono::system_clock::time_point started_;
    std::vector<FileEntry> files_;
};

} // namespace cohwalk
