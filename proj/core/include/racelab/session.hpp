#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace racelab {

inline constexpr std::string_view session_schema_tag = "race-lab/session/1";
inline constexpr int response_window_ms = 5000;
inline constexpr std::size_t learning_streak = 15;
inline constexpr std::size_t transfer_trial_count = 18;

enum class Phase { learning, transfer };
enum class Response { yes, no, timeout };
enum class Group { middle_school, undergraduate, simulated };

/// Rocket characteristics, in feature-code order.
inline constexpr std::array<std::string_view, 4> characteristic_names{"head", "body", "fins", "flames"};

struct Rule {
    std::size_t characteristic = 0;  ///< index into characteristic_names
    int yes_value = 0;               ///< 0 or 1
    /// True when the 4-bit code belongs to the "yes" category.
    bool says_yes(std::string_view nature) const;
};

struct SessionTrial {
    Phase phase = Phase::learning;
    std::string nature;  ///< 4 characters of '0'/'1', head..flames
    Response response = Response::timeout;
    bool correct = false;
    int rt_ms = response_window_ms;
    bool operator==(const SessionTrial&) const = default;
};

struct Session {
    std::string participant_id;
    Group group = Group::simulated;
    Rule rule;
    std::vector<SessionTrial> trials;
    bool hard_cap_reached = false;
    bool withdrawn = false;
    /// Everything else under "metadata" (seed, model parameters, times).
    nlohmann::json extra_metadata = nlohmann::json::object();

    std::vector<const SessionTrial*> phase_trials(Phase phase) const;
};

std::string_view to_string(Phase phase);
std::string_view to_string(Response response);
std::string_view to_string(Group group);
std::optional<Group> parse_group(std::string_view name);

nlohmann::json session_to_json(const Session& session);
std::string session_to_string(const Session& session, int indent = 2);

struct ValidationError {
    std::string path;  ///< JSON path such as $.trials[3].rt_ms
    std::string message;
};

struct ValidationResult {
    std::optional<Session> session;  ///< set only when errors is empty
    std::vector<ValidationError> errors;
    bool parse_error = false;
    bool ok() const { return errors.empty(); }
};

/// Schema and invariant check of a session document. Every violation is a
/// separate error; malformed JSON yields a single parse error.
ValidationResult validate_session(std::string_view document);
ValidationResult validate_session(const nlohmann::json& document);

/// Parses and validates; throws std::runtime_error listing the errors.
Session session_from_json(const nlohmann::json& document);

}  // namespace racelab
