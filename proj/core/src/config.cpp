#include "racelab/config.hpp"

#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fcntl.h>
#include <unistd.h>

namespace racelab {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

Matrix matrix_from_json(const json& doc) {
    return Matrix::from_rows(doc.get<std::vector<std::vector<double>>>());
}

json task_to_json(const TaskSpec& task) {
    json cats = json::array();
    for (const auto& c : task.categories()) cats.push_back({{"name", c.name}, {"members", c.members}});
    return {{"natures", task.natures()},
            {"categories", cats},
            {"features", task.features()},
            {"input_rates", matrix_to_json(task.input_rates())}};
}

TaskSpec task_from_json(const json& doc) {
    std::vector<Category> cats;
    for (const auto& c : doc.at("categories"))
        cats.push_back({c.at("name").get<std::string>(), c.at("members").get<std::vector<std::string>>()});
    return TaskSpec(doc.at("natures").get<std::vector<std::string>>(), std::move(cats),
                    doc.at("features").get<std::vector<std::string>>(), matrix_from_json(doc.at("input_rates")));
}

RunConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw std::domain_error("config must be a JSON object");
    RunConfig c;
    c.source = doc;
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("task")) c.task = task_from_json(doc.at("task"));
    if (const auto it = doc.find("race"); it != doc.end()) {
        c.race.theta = it->value("theta", c.race.theta);
        c.race.horizon = it->value("horizon", c.race.horizon);
        if (it->contains("t_min") && !it->at("t_min").is_null()) c.race.t_min = it->at("t_min").get<double>();
        c.race.dt = it->value("dt", c.race.dt);
        c.race.validate();
    }
    if (const auto it = doc.find("kernel"); it != doc.end()) {
        if (it->value("shape", std::string("rectangular")) != "rectangular")
            throw std::domain_error("only the rectangular kernel is supported");
        c.kernel = Kernel::rectangular(it->value("support", c.kernel.support()), it->value("height", c.kernel.height()));
    }
    if (doc.contains("evidence")) c.evidence = matrix_from_json(doc.at("evidence"));
    if (doc.contains("weights")) c.weights = matrix_from_json(doc.at("weights"));
    if (doc.contains("experiment")) c.experiment = ExperimentConfig::from_json(doc.at("experiment"));
    if (c.task && c.evidence &&
        (c.evidence->rows() != c.task->category_count() || c.evidence->cols() != c.task->nature_count()))
        throw std::domain_error("evidence must be |categories| x |natures|");
    if (c.task && c.weights &&
        (c.weights->rows() != c.task->feature_count() || c.weights->cols() != c.task->category_count()))
        throw std::domain_error("weights must be |features| x |categories|");
    return c;
}

json config_to_json(const RunConfig& c) {
    json doc = json::object();
    if (c.seed) doc["seed"] = *c.seed;
    if (c.task) doc["task"] = task_to_json(*c.task);
    json race = {{"theta", c.race.theta}, {"horizon", c.race.horizon}, {"dt", c.race.dt}};
    if (c.race.t_min) race["t_min"] = *c.race.t_min;
    doc["race"] = race;
    doc["kernel"] = {{"shape", "rectangular"}, {"support", c.kernel.support()}, {"height", c.kernel.height()}};
    if (c.evidence) doc["evidence"] = matrix_to_json(*c.evidence);
    if (c.weights) doc["weights"] = matrix_to_json(*c.weights);
    doc["experiment"] = c.experiment.to_json();
    return doc;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return config_from_json(json::parse(text));
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

std::string config_hash(const json& doc) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : doc.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed, std::uint64_t fallback) {
    if (const char* env = std::getenv("RACE_LAB_SEED"); env && *env) {
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (errno != 0 || *end != '\0') throw std::domain_error("RACE_LAB_SEED must be an unsigned integer");
        return v;
    }
    return explicit_seed.value_or(fallback);
}

namespace {

void write_all(int fd, std::string_view content, const std::filesystem::path& path) {
    const char* p = content.data();
    std::size_t left = content.size();
    while (left > 0) {
        const ssize_t n = ::write(fd, p, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw std::runtime_error("write failed for " + path.string() + ": " + std::strerror(errno));
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) throw std::runtime_error("fsync failed for " + path.string());
}

std::filesystem::path temp_name(const std::filesystem::path& path) {
    static std::atomic<unsigned> counter{0};
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    return path.parent_path() /
           ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()) + "." +
            std::to_string(tid % 100000) + "." + std::to_string(counter++));
}

template <class Commit>
void via_temp(const std::filesystem::path& path, std::string_view content, Commit&& commit) {
    const auto tmp = temp_name(path);
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
    if (fd < 0) throw std::runtime_error("cannot create " + tmp.string() + ": " + std::strerror(errno));
    try {
        write_all(fd, content, path);
    } catch (...) {
        ::close(fd);
        ::unlink(tmp.c_str());
        throw;
    }
    ::close(fd);
    commit(tmp);
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    via_temp(path, content, [&](const std::filesystem::path& tmp) {
        if (std::rename(tmp.c_str(), path.c_str()) != 0) {
            const int err = errno;
            ::unlink(tmp.c_str());
            throw std::runtime_error("cannot move into " + path.string() + ": " + std::strerror(err));
        }
    });
}

bool write_file_exclusive(const std::filesystem::path& path, std::string_view content) {
    bool created = true;
    via_temp(path, content, [&](const std::filesystem::path& tmp) {
        // link() fails with EEXIST instead of replacing the target.
        if (::link(tmp.c_str(), path.c_str()) != 0) {
            const int err = errno;
            ::unlink(tmp.c_str());
            if (err == EEXIST) {
                created = false;
                return;
            }
            throw std::runtime_error("cannot create " + path.string() + ": " + std::strerror(err));
        }
        ::unlink(tmp.c_str());
    });
    return created;
}

json provenance(std::uint64_t seed, const json& config) {
    return {{"seed", seed}, {"config_hash", config_hash(config)}, {"tool_version", tool_version}};
}

}  // namespace racelab
