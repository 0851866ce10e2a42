#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "gesturescope/store.hpp"

namespace httplib {
class Server;
}

namespace gesturescope {

/// HTTP/JSON front of a VideoStore.
///
///   GET    /videos
///   GET    /videos/{id}/bundle          (ETag / If-None-Match)
///   GET    /videos/{id}/media           (Range requests)
///   GET    /videos/{id}/search?q=
///   GET    /videos/{id}/trajectory?start=&end=
///   GET    /videos/{id}/bookmarks       POST /videos/{id}/bookmarks
///   DELETE /videos/{id}/bookmarks/{bookmark_id}
///   GET    /videos/{id}/screenshots     POST /videos/{id}/screenshots
///   GET    /config                      PUT  /config
class ApiServer {
public:
    explicit ApiServer(VideoStore& store, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds without serving. Port 0 picks a free port. Throws StorageError when the address is unavailable.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void serve();
    void stop();
    bool running() const;

private:
    void install_routes();

    VideoStore& store_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace gesturescope
