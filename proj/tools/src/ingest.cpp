#include "racelab_cli/ingest.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <stdexcept>

#include "httplib.h"
#include "racelab/config.hpp"
#include "racelab/session.hpp"

namespace racelab::cli {

using nlohmann::json;

namespace {

std::string safe_name(std::string_view id) {
    std::string out;
    for (char c : id.substr(0, 64)) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "anonymous" : out;
}

std::string utc_stamp() {
    const auto now = std::chrono::system_clock::now();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s%03dZ", buf, static_cast<int>(ms));
    return out;
}

}  // namespace

IngestResponse ingest_session(std::string_view payload, const std::filesystem::path& storage) {
    const auto result = validate_session(payload);
    if (!result.ok()) {
        json errors = json::array();
        for (const auto& e : result.errors) errors.push_back({{"path", e.path}, {"message", e.message}});
        return {422, {{"errors", errors}}};
    }
    try {
        std::filesystem::create_directories(storage);
        const std::string base = safe_name(result.session->participant_id) + "-" + utc_stamp();
        // Store what was sent, not a re-serialization.
        const std::string content(payload);
        for (int n = 0; n < 1000; ++n) {
            const std::string name = base + (n == 0 ? "" : "-" + std::to_string(n)) + ".json";
            if (write_file_exclusive(storage / name, content)) return {201, {{"stored", name}}};
        }
        return {500, {{"error", "no free file name for " + base}}};
    } catch (const std::exception& e) {
        return {500, {{"error", e.what()}}};
    }
}

struct IngestServer::Impl {
    ServeOptions options;
    httplib::Server server;
    int port = 0;
};

IngestServer::IngestServer(ServeOptions options) : impl_(std::make_unique<Impl>()) {
    impl_->options = std::move(options);
    auto& srv = impl_->server;
    const auto storage = impl_->options.storage;
    srv.Post("/sessions", [storage](const httplib::Request& req, httplib::Response& res) {
        const auto r = ingest_session(req.body, storage);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    });
    srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"status", "ok"}, {"tool_version", tool_version}}.dump(), "application/json");
    });
    if (impl_->options.static_dir) {
        if (!srv.set_mount_point("/", impl_->options.static_dir->string()))
            throw std::runtime_error("static directory not found: " + impl_->options.static_dir->string());
    }
}

IngestServer::~IngestServer() { stop(); }

int IngestServer::bind() {
    auto& o = impl_->options;
    if (o.port == 0) impl_->port = impl_->server.bind_to_any_port(o.host);
    else impl_->port = impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
    if (impl_->port < 0) throw std::runtime_error("cannot bind " + o.host + ":" + std::to_string(o.port));
    return impl_->port;
}

bool IngestServer::listen() { return impl_->server.listen_after_bind(); }

void IngestServer::stop() {
    if (impl_) impl_->server.stop();
}

void IngestServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace racelab::cli
