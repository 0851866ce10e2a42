#include "gesturescope/service.hpp"

#include <fstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "gesturescope/analysis.hpp"
#include "gesturescope/errors.hpp"

namespace gesturescope {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const char* kind, const std::string& message) {
    send_json(res, {{"error", kind}, {"message", message}}, status);
}

// Maps module errors onto HTTP statuses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const NotFound& e) {
        send_error(res, 404, e.kind(), e.what());
    } catch (const Conflict& e) {
        send_error(res, 409, e.kind(), e.what());
    } catch (const ValidationError& e) {
        send_error(res, 422, e.kind(), e.what());
    } catch (const ConfigError& e) {
        send_error(res, 400, e.kind(), e.what());
    } catch (const Error& e) {
        send_error(res, 500, e.kind(), e.what());
    } catch (const json::exception& e) {
        send_error(res, 400, "BadRequest", e.what());
    }
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("request body is not JSON: ") + e.what());
    }
}

std::vector<TranscriptWord> bundle_words(const json& bundle) {
    std::vector<TranscriptWord> words;
    for (const auto& w : bundle.at("words")) {
        words.push_back({w.at("text"), w.at("start"), w.at("end"), std::nullopt, false});
    }
    return words;
}

json trajectory_json(const json& bundle, double start, double end) {
    const json& v = bundle.at("timelines").at("vertical");
    const json& h = bundle.at("timelines").at("horizontal");
    const json& t = v.at("t");
    std::vector<FrameSkeleton> frames;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double ts = t[i];
        if (ts < start || ts >= end) continue;
        NormalizedSkeleton s;
        auto fill = [&](std::size_t k, const char* hand) {
            if (!v[hand][i].is_null() && !h[hand][i].is_null()) {
                s.keypoints[k] = {h[hand][i].get<double>(), v[hand][i].get<double>(), 1.0};
            }
        };
        fill(body25::RWrist, "right_hand");
        fill(body25::LWrist, "left_hand");
        frames.push_back({ts, s});
    }
    const Trajectory traj = build_trajectory(frames);
    auto items = [](const std::vector<TrajectoryItem>& in) {
        json out = json::array();
        for (const auto& item : in) {
            if (const auto* p = std::get_if<TrajectoryPoint>(&item)) {
                out.push_back({{"t", p->timestamp}, {"x", p->x}, {"y", p->y}});
            } else {
                out.push_back(nullptr);
            }
        }
        return out;
    };
    return {{"start", start}, {"end", end}, {"right_hand", items(traj.right_hand)}, {"left_hand", items(traj.left_hand)}};
}

std::string content_type_for(const fs::path& p) {
    const std::string ext = p.extension().string();
    if (ext == ".mp4" || ext == ".m4v") return "video/mp4";
    if (ext == ".webm") return "video/webm";
    if (ext == ".ogg" || ext == ".ogv") return "video/ogg";
    if (ext == ".mov") return "video/quicktime";
    return "application/octet-stream";
}

}  // namespace

ApiServer::ApiServer(VideoStore& store, std::optional<fs::path> static_dir)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
    // SO_REUSEADDR without the library's default SO_REUSEPORT.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    install_routes();
    if (static_dir) server_->set_mount_point("/", static_dir->string());
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound < 0) throw StorageError("cannot bind " + host);
        return bound;
    }
    if (!server_->bind_to_port(host, port)) {
        throw StorageError("cannot bind " + host + ":" + std::to_string(port) + " (address in use?)");
    }
    return port;
}

void ApiServer::serve() { server_->listen_after_bind(); }

void ApiServer::stop() {
    if (server_) server_->stop();
}

bool ApiServer::running() const { return server_->is_running(); }

void ApiServer::install_routes() {
    auto& s = *server_;
    s.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
    });

    s.Get("/videos", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            json out = json::array();
            for (const auto& v : store_.list_videos()) {
                json item{{"video_id", v.video_id},
                          {"title", v.title},
                          {"duration", v.duration},
                          {"analysis_status", std::string(to_string(v.status))}};
                if (!v.diagnostic.empty()) item["diagnostic"] = v.diagnostic;
                out.push_back(std::move(item));
            }
            send_json(res, out);
        });
    });

    s.Get(R"(/videos/([^/]+)/bundle)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const ServedBundle b = store_.get_bundle(req.matches[1]);
            res.set_header("ETag", b.etag);
            res.set_header("Cache-Control", "no-cache");
            if (req.get_header_value("If-None-Match") == b.etag) {
                res.status = 304;
                return;
            }
            res.status = 200;
            res.set_content(b.body, "application/json");
        });
    });

    s.Get(R"(/videos/([^/]+)/media)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto path = store_.media_path(req.matches[1]);
            if (!path) throw NotFound("no media file for \"" + std::string(req.matches[1]) + "\"");
            const std::size_t size = fs::file_size(*path);
            auto file = std::make_shared<std::ifstream>(*path, std::ios::binary);
            if (!*file) throw StorageError("cannot open media file");
            res.set_header("Accept-Ranges", "bytes");
            res.set_content_provider(size, content_type_for(*path),
                                     [file](std::size_t offset, std::size_t length, httplib::DataSink& sink) {
                                         std::vector<char> buf(std::min<std::size_t>(length, 1 << 16));
                                         file->clear();
                                         file->seekg(static_cast<std::streamoff>(offset));
                                         file->read(buf.data(), static_cast<std::streamsize>(buf.size()));
                                         const auto got = file->gcount();
                                         if (got <= 0) return false;
                                         return sink.write(buf.data(), static_cast<std::size_t>(got));
                                     });
        });
    });

    s.Get(R"(/videos/([^/]+)/search)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const ServedBundle b = store_.get_bundle(req.matches[1]);
            const std::string q = req.get_param_value("q");
            json hits = json::array();
            const auto words = bundle_words(*b.bundle);
            for (std::size_t i : search_keyword(words, q)) {
                hits.push_back({{"index", i}, {"text", words[i].text}, {"start", words[i].start}, {"end", words[i].end}});
            }
            send_json(res, {{"query", q}, {"matches", hits}});
        });
    });

    s.Get(R"(/videos/([^/]+)/trajectory)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const ServedBundle b = store_.get_bundle(req.matches[1]);
            const double duration = b.bundle->at("video").value("duration", 0.0);
            double start = 0.0;
            double end = std::nextafter(duration, std::numeric_limits<double>::infinity());
            try {
                if (req.has_param("start")) start = std::stod(req.get_param_value("start"));
                if (req.has_param("end")) end = std::stod(req.get_param_value("end"));
            } catch (const std::exception&) {
                throw ConfigError("start/end must be numbers");
            }
            if (!(start <= end)) throw ConfigError("start must not exceed end");
            send_json(res, trajectory_json(*b.bundle, start, end));
        });
    });

    s.Get(R"(/videos/([^/]+)/bookmarks)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, store_.list_bookmarks(req.matches[1])); });
    });
    s.Post(R"(/videos/([^/]+)/bookmarks)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, store_.create_bookmark(req.matches[1], parse_body(req)), 201); });
    });
    s.Delete(R"(/videos/([^/]+)/bookmarks/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            store_.delete_bookmark(req.matches[1], req.matches[2]);
            res.status = 204;
        });
    });

    s.Get(R"(/videos/([^/]+)/screenshots)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, store_.list_screenshots(req.matches[1])); });
    });
    s.Post(R"(/videos/([^/]+)/screenshots)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = parse_body(req);
            if (!body.contains("timestamp") || !body["timestamp"].is_number()) {
                throw ValidationError("screenshot needs a numeric timestamp");
            }
            send_json(res, store_.record_screenshot(req.matches[1], body["timestamp"].get<double>()), 201);
        });
    });

    s.Get("/config", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send_json(res, config_to_json(store_.config())); });
    });
    s.Put("/config", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const AnalysisConfig cfg = config_from_json(parse_body(req));
            store_.put_config(cfg);
            send_json(res, config_to_json(cfg));
        });
    });
}

}  // namespace gesturescope
