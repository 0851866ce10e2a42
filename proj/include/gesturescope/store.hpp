#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gesturescope/config.hpp"

namespace gesturescope {

std::string sha256_hex(std::string_view data);

/// Writes via a temporary file in the same directory and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Stores a bundle under <video_dir>/bundles/bundle-<hash>.json (never
/// rewritten once present) and swaps <video_dir>/current to point at it.
std::filesystem::path publish_bundle(const std::filesystem::path& video_dir, const std::string& body,
                                     const std::string& content_hash);

enum class AnalysisStatus { Pending, Analyzed, Failed };
std::string_view to_string(AnalysisStatus s);

struct VideoSummary {
    std::string video_id;
    std::string title;
    double duration = 0.0;
    AnalysisStatus status = AnalysisStatus::Pending;
    std::string diagnostic;
};

struct ServedBundle {
    std::shared_ptr<const nlohmann::json> bundle;  // as stored on disk
    std::string body;                              // with current thresholds applied
    std::string etag;
};

/// File-backed persistence for one data root:
///   <root>/config.json
///   <root>/videos/<id>/{video.json, current, bundles/, bookmarks.json, screenshots.json, media.*}
class VideoStore {
public:
    explicit VideoStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path video_dir(const std::string& video_id) const;

    std::vector<VideoSummary> list_videos() const;

    /// Throws NotFound for unknown ids, Conflict while pending, StorageError when the bundle is unreadable.
    ServedBundle get_bundle(const std::string& video_id) const;

    nlohmann::json create_bookmark(const std::string& video_id, const nlohmann::json& request);
    nlohmann::json list_bookmarks(const std::string& video_id) const;
    void delete_bookmark(const std::string& video_id, const std::string& bookmark_id);

    nlohmann::json record_screenshot(const std::string& video_id, double timestamp);
    nlohmann::json list_screenshots(const std::string& video_id) const;

    AnalysisConfig config() const;
    void put_config(const AnalysisConfig& config);

    std::optional<std::filesystem::path> media_path(const std::string& video_id) const;

private:
    std::shared_ptr<const nlohmann::json> load_bundle(const std::string& video_id) const;
    void require_video(const std::string& video_id) const;
    std::mutex& video_mutex(const std::string& video_id);

    std::filesystem::path root_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::string, std::shared_ptr<const nlohmann::json>> bundle_cache_;  // keyed by bundle path
    std::mutex write_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> video_mutexes_;
    mutable std::mutex config_mutex_;
};

std::string utc_timestamp();

}  // namespace gesturescope
