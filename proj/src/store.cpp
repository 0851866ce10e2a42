#include "gesturescope/store.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "gesturescope/analysis.hpp"
#include "gesturescope/errors.hpp"

namespace gesturescope {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw StorageError("sha256 failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StorageError("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw StorageError("short write to " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw StorageError("cannot rename onto " + path.string() + ": " + ec.message());
}

fs::path publish_bundle(const fs::path& video_dir, const std::string& body, const std::string& content_hash) {
    const fs::path name = "bundle-" + content_hash + ".json";
    const fs::path target = video_dir / "bundles" / name;
    if (!fs::exists(target)) {
        write_file_atomic(target, body);
    }
    write_file_atomic(video_dir / "current", (fs::path("bundles") / name).string());
    return target;
}

std::string_view to_string(AnalysisStatus s) {
    switch (s) {
        case AnalysisStatus::Pending: return "pending";
        case AnalysisStatus::Analyzed: return "analyzed";
        case AnalysisStatus::Failed: return "failed";
    }
    return "pending";
}

namespace {

bool valid_id(const std::string& id) {
    if (id.empty() || id == "." || id == ".." || id.size() > 200) return false;
    return std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '_' || c == '.';
    });
}

std::optional<std::string> try_read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_or(const fs::path& p, json fallback) {
    auto text = try_read(p);
    if (!text) return fallback;
    try {
        return json::parse(*text);
    } catch (const json::parse_error& e) {
        throw StorageError("corrupt " + p.string() + ": " + e.what());
    }
}

}  // namespace

VideoStore::VideoStore(fs::path root) : root_(std::move(root)) {}

fs::path VideoStore::video_dir(const std::string& video_id) const {
    if (!valid_id(video_id)) throw NotFound("unknown video \"" + video_id + "\"");
    return root_ / "videos" / video_id;
}

void VideoStore::require_video(const std::string& video_id) const {
    if (!fs::is_directory(video_dir(video_id))) throw NotFound("unknown video \"" + video_id + "\"");
}

std::mutex& VideoStore::video_mutex(const std::string& video_id) {
    std::lock_guard lock(write_mutex_);
    auto& m = video_mutexes_[video_id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
}

std::shared_ptr<const json> VideoStore::load_bundle(const std::string& video_id) const {
    const fs::path dir = video_dir(video_id);
    require_video(video_id);
    auto pointer = try_read(dir / "current");
    if (!pointer) {
        if (fs::exists(dir / "failed.json")) {
            throw StorageError("analysis of \"" + video_id + "\" failed");
        }
        throw Conflict("video \"" + video_id + "\" is not analyzed yet");
    }
    while (!pointer->empty() && std::isspace(static_cast<unsigned char>(pointer->back()))) pointer->pop_back();
    const fs::path path = dir / *pointer;
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = bundle_cache_.find(path.string()); it != bundle_cache_.end()) return it->second;
    }
    auto text = try_read(path);
    if (!text) throw StorageError("bundle file " + path.string() + " is missing");
    std::shared_ptr<json> bundle;
    try {
        bundle = std::make_shared<json>(json::parse(*text));
    } catch (const json::parse_error& e) {
        throw StorageError("bundle " + path.filename().string() + " is corrupt: " + e.what());
    }
    if (!bundle->is_object() || !bundle->contains("schema_version") || !bundle->contains("words") ||
        !bundle->contains("video")) {
        throw StorageError("bundle " + path.filename().string() + " is missing required sections");
    }
    std::lock_guard lock(cache_mutex_);
    bundle_cache_[path.string()] = bundle;
    return bundle;
}

std::vector<VideoSummary> VideoStore::list_videos() const {
    const fs::path videos = root_ / "videos";
    std::error_code ec;
    if (!fs::is_directory(root_, ec)) throw StorageError("data root " + root_.string() + " is not readable");
    std::vector<VideoSummary> out;
    if (!fs::exists(videos, ec)) return out;
    fs::directory_iterator it(videos, ec);
    if (ec) throw StorageError("cannot list " + videos.string() + ": " + ec.message());
    std::vector<std::string> ids;
    for (const auto& entry : it) {
        if (entry.is_directory() && valid_id(entry.path().filename().string())) {
            ids.push_back(entry.path().filename().string());
        }
    }
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
        VideoSummary s;
        s.video_id = id;
        s.title = id;
        try {
            json meta = read_json_or(video_dir(id) / "video.json", json::object());
            if (meta.contains("title") && meta["title"].is_string()) s.title = meta["title"];
        } catch (const StorageError&) {
        }
        try {
            auto bundle = load_bundle(id);
            s.status = AnalysisStatus::Analyzed;
            const json& v = (*bundle)["video"];
            if (v.contains("title") && v["title"].is_string() && !v["title"].get<std::string>().empty()) {
                s.title = v["title"];
            }
            s.duration = v.value("duration", 0.0);
        } catch (const Conflict&) {
            s.status = AnalysisStatus::Pending;
        } catch (const Error& e) {
            s.status = AnalysisStatus::Failed;
            s.diagnostic = e.what();
        }
        out.push_back(std::move(s));
    }
    return out;
}

ServedBundle VideoStore::get_bundle(const std::string& video_id) const {
    auto bundle = load_bundle(video_id);
    const AnalysisConfig cfg = config();
    json served = *bundle;
    apply_thresholds(served, cfg.variation_threshold, cfg.change_threshold);
    ServedBundle out;
    out.bundle = std::move(bundle);
    out.body = dump_bundle(served);
    out.etag = "\"" + sha256_hex(out.body) + "\"";
    return out;
}

namespace {

bool contains_id(const json& items, std::size_t id) {
    return std::any_of(items.begin(), items.end(), [id](const json& x) { return x.value("id", std::size_t(-1)) == id; });
}

void check_id_list(const json& payload, const char* key, const json& items, const char* what) {
    if (!payload.contains(key) || !payload[key].is_array() || payload[key].empty()) {
        throw ValidationError(std::string("payload.") + key + " must be a non-empty array");
    }
    for (const auto& id : payload[key]) {
        if (!id.is_number_integer() || id.get<std::int64_t>() < 0 || !contains_id(items, id.get<std::size_t>())) {
            throw ValidationError(std::string("payload references a nonexistent ") + what + " " + id.dump());
        }
    }
}

}  // namespace

json VideoStore::create_bookmark(const std::string& video_id, const json& request) {
    auto bundle = load_bundle(video_id);
    if (!request.is_object() || !request.contains("kind") || !request["kind"].is_string()) {
        throw ValidationError("bookmark needs a kind");
    }
    const std::string kind = request["kind"];
    const json payload = request.value("payload", json::object());
    if (!payload.is_object()) throw ValidationError("payload must be an object");
    if (kind == "gesture_segment") {
        check_id_list(payload, "segment_ids", bundle->at("segments"), "segment");
    } else if (kind == "phrase") {
        check_id_list(payload, "phrase_ids", bundle->at("phrases"), "phrase");
    } else if (kind == "time_range") {
        if (!payload.contains("start") || !payload["start"].is_number() || !payload.contains("end") ||
            !payload["end"].is_number()) {
            throw ValidationError("time_range payload needs numeric start and end");
        }
        const double s = payload["start"];
        const double e = payload["end"];
        const double duration = bundle->at("video").value("duration", 0.0);
        if (s < 0.0 || e < s || e > duration) throw ValidationError("time_range outside the video");
    } else {
        throw ValidationError("unknown bookmark kind \"" + kind + "\"");
    }
    std::string note;
    if (request.contains("note")) {
        if (!request["note"].is_string()) throw ValidationError("note must be a string");
        note = request["note"];
    }

    std::lock_guard lock(video_mutex(video_id));
    const fs::path path = video_dir(video_id) / "bookmarks.json";
    json doc = read_json_or(path, json{{"next_id", 1}, {"items", json::array()}});
    const std::size_t n = doc.value("next_id", std::size_t{1});
    json bookmark{{"id", "bm-" + std::to_string(n)},
                  {"video_id", video_id},
                  {"kind", kind},
                  {"payload", payload},
                  {"note", note},
                  {"created_at", utc_timestamp()}};
    doc["items"].push_back(bookmark);
    doc["next_id"] = n + 1;
    write_file_atomic(path, doc.dump(2));
    return bookmark;
}

json VideoStore::list_bookmarks(const std::string& video_id) const {
    require_video(video_id);
    return read_json_or(video_dir(video_id) / "bookmarks.json", json{{"items", json::array()}}).at("items");
}

void VideoStore::delete_bookmark(const std::string& video_id, const std::string& bookmark_id) {
    require_video(video_id);
    std::lock_guard lock(video_mutex(video_id));
    const fs::path path = video_dir(video_id) / "bookmarks.json";
    json doc = read_json_or(path, json{{"next_id", 1}, {"items", json::array()}});
    json& items = doc["items"];
    const auto before = items.size();
    json kept = json::array();
    for (auto& b : items) {
        if (b.value("id", "") != bookmark_id) kept.push_back(b);
    }
    if (kept.size() == before) return;
    items = std::move(kept);
    write_file_atomic(path, doc.dump(2));
}

json VideoStore::record_screenshot(const std::string& video_id, double timestamp) {
    auto bundle = load_bundle(video_id);
    const double duration = bundle->at("video").value("duration", 0.0);
    if (!(timestamp >= 0.0 && timestamp <= duration)) {
        throw ValidationError("timestamp " + std::to_string(timestamp) + " is outside [0, " + std::to_string(duration) + "]");
    }
    std::string word;
    for (const auto& w : bundle->at("words")) {
        if (w.at("start").get<double>() <= timestamp && timestamp < w.at("end").get<double>()) {
            word = w.at("text");
            break;
        }
    }

    std::lock_guard lock(video_mutex(video_id));
    const fs::path path = video_dir(video_id) / "screenshots.json";
    json doc = read_json_or(path, json{{"next_id", 1}, {"items", json::array()}});
    const std::size_t n = doc.value("next_id", std::size_t{1});
    json record{{"id", "shot-" + std::to_string(n)},
                {"video_id", video_id},
                {"timestamp", timestamp},
                {"word", word},
                {"created_at", utc_timestamp()}};
    doc["items"].push_back(record);
    doc["next_id"] = n + 1;
    write_file_atomic(path, doc.dump(2));
    return record;
}

json VideoStore::list_screenshots(const std::string& video_id) const {
    require_video(video_id);
    return read_json_or(video_dir(video_id) / "screenshots.json", json{{"items", json::array()}}).at("items");
}

AnalysisConfig VideoStore::config() const {
    std::lock_guard lock(config_mutex_);
    auto text = try_read(root_ / "config.json");
    if (!text) return AnalysisConfig{};
    return parse_config(*text);
}

void VideoStore::put_config(const AnalysisConfig& config) {
    config.validate();
    std::lock_guard lock(config_mutex_);
    write_file_atomic(root_ / "config.json", config_to_json(config).dump(2));
}

std::optional<fs::path> VideoStore::media_path(const std::string& video_id) const {
    const fs::path dir = video_dir(video_id);
    require_video(video_id);
    json meta = read_json_or(dir / "video.json", json::object());
    if (meta.contains("media") && meta["media"].is_string()) {
        const fs::path p = dir / meta["media"].get<std::string>();
        if (fs::is_regular_file(p)) return p;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().stem() == "media") return entry.path();
    }
    return std::nullopt;
}

}  // namespace gesturescope
