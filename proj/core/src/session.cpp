#include "racelab/session.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace racelab {

using nlohmann::json;

bool Rule::says_yes(std::string_view nature) const {
    if (nature.size() != characteristic_names.size() || characteristic >= nature.size())
        throw std::domain_error("nature code must have 4 characters");
    return nature[characteristic] - '0' == yes_value;
}

std::vector<const SessionTrial*> Session::phase_trials(Phase phase) const {
    std::vector<const SessionTrial*> out;
    for (const auto& t : trials)
        if (t.phase == phase) out.push_back(&t);
    return out;
}

std::string_view to_string(Phase phase) {
    return phase == Phase::learning ? "learning" : "transfer";
}

std::string_view to_string(Response response) {
    switch (response) {
        case Response::yes: return "yes";
        case Response::no: return "no";
        case Response::timeout: return "timeout";
    }
    return "?";
}

std::string_view to_string(Group group) {
    switch (group) {
        case Group::middle_school: return "middle_school";
        case Group::undergraduate: return "undergraduate";
        case Group::simulated: return "simulated";
    }
    return "?";
}

std::optional<Group> parse_group(std::string_view name) {
    for (Group g : {Group::middle_school, Group::undergraduate, Group::simulated})
        if (to_string(g) == name) return g;
    return std::nullopt;
}

json session_to_json(const Session& session) {
    json trials = json::array();
    for (const auto& t : session.trials)
        trials.push_back({{"phase", to_string(t.phase)},
                          {"nature", t.nature},
                          {"response", to_string(t.response)},
                          {"correct", t.correct},
                          {"rt_ms", t.rt_ms}});
    json metadata = session.extra_metadata.is_object() ? session.extra_metadata : json::object();
    metadata["hard_cap_reached"] = session.hard_cap_reached;
    metadata["withdrawn"] = session.withdrawn;
    return {{"schema", session_schema_tag},
            {"participant_id", session.participant_id},
            {"group", to_string(session.group)},
            {"rule",
             {{"characteristic", characteristic_names[session.rule.characteristic]},
              {"yes_value", session.rule.yes_value}}},
            {"trials", std::move(trials)},
            {"metadata", std::move(metadata)}};
}

std::string session_to_string(const Session& session, int indent) {
    return session_to_json(session).dump(indent);
}

namespace {

class Checker {
public:
    std::vector<ValidationError> errors;

    void fail(std::string path, std::string message) {
        errors.push_back({std::move(path), std::move(message)});
    }

    const json* field(const json& obj, const std::string& path, const char* key, bool required = true) {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) fail(path + "." + key, "missing field");
            return nullptr;
        }
        return &*it;
    }

    std::optional<std::string> string_field(const json& obj, const std::string& path, const char* key) {
        const json* v = field(obj, path, key);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            fail(path + "." + key, "must be a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }
};

bool valid_code(const std::string& s) {
    return s.size() == characteristic_names.size() &&
           std::all_of(s.begin(), s.end(), [](char c) { return c == '0' || c == '1'; });
}

std::optional<Response> parse_response(const std::string& s) {
    for (Response r : {Response::yes, Response::no, Response::timeout})
        if (to_string(r) == s) return r;
    return std::nullopt;
}

void check_protocol(const Session& s, Checker& check) {
    std::vector<std::size_t> learning, transfer;
    for (std::size_t k = 0; k < s.trials.size(); ++k)
        (s.trials[k].phase == Phase::learning ? learning : transfer).push_back(k);
    auto trial_path = [](std::size_t k) { return "$.trials[" + std::to_string(k) + "]"; };

    if (!learning.empty() && !transfer.empty() && transfer.front() < learning.back())
        check.fail(trial_path(transfer.front()) + ".phase", "transfer trial before the end of the learning phase");

    if (s.withdrawn) return;

    if (learning.empty()) {
        check.fail("$.trials", "learning phase is empty");
    } else {
        std::size_t streak = 0;
        std::optional<std::size_t> reached;
        for (std::size_t n = 0; n < learning.size(); ++n) {
            streak = s.trials[learning[n]].correct ? streak + 1 : 0;
            if (streak == learning_streak && !reached) reached = n;
        }
        if (reached && *reached + 1 < learning.size())
            check.fail(trial_path(learning[*reached + 1]),
                       "learning continues after 15 consecutive correct trials");
        if (!reached && !s.hard_cap_reached)
            check.fail(trial_path(learning.back()),
                       "learning phase does not end with 15 consecutive correct trials");
    }

    if (transfer.size() != transfer_trial_count)
        check.fail("$.trials", "transfer phase has " + std::to_string(transfer.size()) +
                                   " trials, expected 18");

    std::set<std::string> learned;
    std::map<int, std::set<std::string>> learned_by_answer;
    for (std::size_t k : learning) {
        learned.insert(s.trials[k].nature);
        learned_by_answer[s.rule.says_yes(s.trials[k].nature)].insert(s.trials[k].nature);
    }
    if (learned.size() > 10) check.fail("$.trials", "more than 10 distinct learning natures");
    for (const auto& [answer, natures] : learned_by_answer)
        if (natures.size() > 5)
            check.fail("$.trials", std::string("more than 5 learning natures in the ") +
                                       (answer ? "yes" : "no") + " category");

    std::map<std::string, std::size_t> shown;
    for (std::size_t k : transfer) {
        if (learned.count(s.trials[k].nature))
            check.fail(trial_path(k) + ".nature", "transfer nature was shown during learning");
        ++shown[s.trials[k].nature];
    }
    if (transfer.size() == transfer_trial_count) {
        bool balanced = shown.size() == 6;
        for (const auto& [nature, count] : shown) balanced = balanced && count == 3;
        if (!balanced) check.fail("$.trials", "transfer phase must show 6 natures 3 times each");
    }
}

}  // namespace

ValidationResult validate_session(std::string_view document) {
    json parsed;
    try {
        parsed = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        ValidationResult result;
        result.parse_error = true;
        result.errors.push_back({"$", std::string("parse error: ") + e.what()});
        return result;
    }
    return validate_session(parsed);
}

ValidationResult validate_session(const json& doc) {
    Checker check;
    ValidationResult result;
    if (!doc.is_object()) {
        check.fail("$", "document must be an object");
        result.errors = std::move(check.errors);
        return result;
    }

    Session s;
    if (const auto tag = check.string_field(doc, "$", "schema"); tag && *tag != session_schema_tag)
        check.fail("$.schema", "unsupported schema '" + *tag + "'");
    if (const auto id = check.string_field(doc, "$", "participant_id")) {
        if (id->empty()) check.fail("$.participant_id", "must not be empty");
        s.participant_id = *id;
    }
    if (const auto group = check.string_field(doc, "$", "group")) {
        if (const auto g = parse_group(*group)) s.group = *g;
        else check.fail("$.group", "unknown group '" + *group + "'");
    }

    bool rule_ok = false;
    if (const json* rule = check.field(doc, "$", "rule")) {
        if (!rule->is_object()) {
            check.fail("$.rule", "must be an object");
        } else {
            const auto name = check.string_field(*rule, "$.rule", "characteristic");
            const json* yes = check.field(*rule, "$.rule", "yes_value");
            bool name_ok = false, yes_ok = false;
            if (name) {
                const auto it = std::find(characteristic_names.begin(), characteristic_names.end(), *name);
                if (it == characteristic_names.end()) {
                    check.fail("$.rule.characteristic", "unknown characteristic '" + *name + "'");
                } else {
                    s.rule.characteristic = static_cast<std::size_t>(it - characteristic_names.begin());
                    name_ok = true;
                }
            }
            if (yes) {
                if (!yes->is_number_integer() || (yes->get<int>() != 0 && yes->get<int>() != 1)) {
                    check.fail("$.rule.yes_value", "must be 0 or 1");
                } else {
                    s.rule.yes_value = yes->get<int>();
                    yes_ok = true;
                }
            }
            rule_ok = name_ok && yes_ok;
        }
    }

    if (const json* meta = check.field(doc, "$", "metadata", false)) {
        if (!meta->is_object()) {
            check.fail("$.metadata", "must be an object");
        } else {
            s.extra_metadata = *meta;
            for (const char* flag : {"hard_cap_reached", "withdrawn"}) {
                const auto it = meta->find(flag);
                if (it == meta->end()) continue;
                if (!it->is_boolean()) {
                    check.fail(std::string("$.metadata.") + flag, "must be a boolean");
                    continue;
                }
                (std::string_view(flag) == "withdrawn" ? s.withdrawn : s.hard_cap_reached) = it->get<bool>();
                s.extra_metadata.erase(flag);
            }
        }
    }

    bool trials_ok = false;
    if (const json* trials = check.field(doc, "$", "trials")) {
        if (!trials->is_array()) {
            check.fail("$.trials", "must be an array");
        } else {
            trials_ok = true;
            for (std::size_t k = 0; k < trials->size(); ++k) {
                const json& t = (*trials)[k];
                const std::string path = "$.trials[" + std::to_string(k) + "]";
                const std::size_t before = check.errors.size();
                if (!t.is_object()) {
                    check.fail(path, "must be an object");
                    trials_ok = false;
                    continue;
                }
                SessionTrial trial;
                if (const auto phase = check.string_field(t, path, "phase")) {
                    if (*phase == "learning") trial.phase = Phase::learning;
                    else if (*phase == "transfer") trial.phase = Phase::transfer;
                    else check.fail(path + ".phase", "unknown phase '" + *phase + "'");
                }
                if (const auto nature = check.string_field(t, path, "nature")) {
                    if (valid_code(*nature)) trial.nature = *nature;
                    else check.fail(path + ".nature", "must be 4 characters of 0/1");
                }
                if (const auto response = check.string_field(t, path, "response")) {
                    if (const auto r = parse_response(*response)) trial.response = *r;
                    else check.fail(path + ".response", "unknown response '" + *response + "'");
                }
                if (const json* correct = check.field(t, path, "correct")) {
                    if (correct->is_boolean()) trial.correct = correct->get<bool>();
                    else check.fail(path + ".correct", "must be a boolean");
                }
                if (const json* rt = check.field(t, path, "rt_ms")) {
                    if (!rt->is_number_integer()) {
                        check.fail(path + ".rt_ms", "must be an integer");
                    } else {
                        const auto value = rt->get<long long>();
                        if (value <= 0) check.fail(path + ".rt_ms", "rt must be positive");
                        else if (value > response_window_ms) check.fail(path + ".rt_ms", "rt exceeds 5000 ms");
                        trial.rt_ms = static_cast<int>(std::clamp<long long>(value, -1, response_window_ms + 1));
                    }
                }
                if (check.errors.size() != before) {
                    trials_ok = false;
                    continue;
                }
                const bool timeout = trial.response == Response::timeout;
                if (timeout && trial.rt_ms != response_window_ms)
                    check.fail(path + ".rt_ms", "timeout must record rt_ms = 5000");
                if (!timeout && trial.rt_ms == response_window_ms)
                    check.fail(path + ".response", "rt_ms = 5000 must be recorded as a timeout");
                if (timeout && trial.correct) check.fail(path + ".correct", "a timeout cannot be correct");
                if (!timeout && rule_ok &&
                    trial.correct != ((trial.response == Response::yes) == s.rule.says_yes(trial.nature)))
                    check.fail(path + ".correct", "correct flag disagrees with the rule");
                s.trials.push_back(std::move(trial));
            }
        }
    }

    if (trials_ok && rule_ok) check_protocol(s, check);

    result.errors = std::move(check.errors);
    if (result.errors.empty()) result.session = std::move(s);
    return result;
}

Session session_from_json(const json& document) {
    auto result = validate_session(document);
    if (!result.ok()) {
        std::string message = "invalid session:";
        for (const auto& e : result.errors) message += "\n  " + e.path + ": " + e.message;
        throw std::runtime_error(message);
    }
    return std::move(*result.session);
}

}  // namespace racelab
