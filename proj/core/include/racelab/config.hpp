#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "racelab/core_model.hpp"
#include "racelab/experiment.hpp"
#include "racelab/weight_state.hpp"

namespace racelab {

inline constexpr std::string_view tool_version = "0.3.0";

/// One configuration document. Every section is optional:
///
///   seed        integer
///   task        {natures, categories: [{name, members}], features,
///                input_rates: rows per feature}
///   race        {theta, horizon, t_min, dt}
///   kernel      {shape: "rectangular", support, height}
///   evidence    rows per category, one column per nature (drift or rate)
///   weights     rows per feature, one column per category
///   experiment  ExperimentConfig fields
struct RunConfig {
    std::optional<std::uint64_t> seed;
    std::optional<TaskSpec> task;
    RaceParams race;
    Kernel kernel = Kernel::default_kernel();
    std::optional<Matrix> evidence;
    std::optional<Matrix> weights;
    ExperimentConfig experiment;
    nlohmann::json source = nlohmann::json::object();
};

RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& config);
/// Reads and parses a config file; throws std::runtime_error naming the path.
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json task_to_json(const TaskSpec& task);
TaskSpec task_from_json(const nlohmann::json& doc);
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& doc);

/// FNV-1a 64 of the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

/// Seed precedence: RACE_LAB_SEED, then the explicit value, then fallback.
std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed, std::uint64_t fallback);

/// Writes through a temporary file in the same directory and renames it into
/// place. Throws std::runtime_error on failure, leaving no partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Creates `path` only if it does not exist yet (atomic, never overwrites).
/// Returns false when the name is taken.
bool write_file_exclusive(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Provenance block embedded in every artifact.
nlohmann::json provenance(std::uint64_t seed, const nlohmann::json& config);

}  // namespace racelab
