#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace racelab::cli {

struct IngestResponse {
    int status;
    nlohmann::json body;
};

/// Validates one uploaded session and stores it as a new file in `storage`,
/// named <participant>-<UTC timestamp>[-n].json. Existing files are never
/// replaced. 201 on success, 422 with the error list, 500 on a write error.
IngestResponse ingest_session(std::string_view payload, const std::filesystem::path& storage);

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path storage = "sessions";
    std::optional<std::filesystem::path> static_dir;
};

/// POST /sessions, GET /health and static files under /.
class IngestServer {
public:
    explicit IngestServer(ServeOptions options);
    ~IngestServer();
    IngestServer(const IngestServer&) = delete;
    IngestServer& operator=(const IngestServer&) = delete;

    /// Binds the socket; port 0 picks a free one. Returns the bound port.
    int bind();
    /// Blocks until stop() is called.
    bool listen();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace racelab::cli
