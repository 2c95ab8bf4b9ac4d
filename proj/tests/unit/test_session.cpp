#include <gtest/gtest.h>

#include <string>

#include "racelab/config.hpp"
#include "racelab/experiment.hpp"
#include "racelab/session.hpp"

using namespace racelab;
using nlohmann::json;

namespace {

json base_session() {
    static const json doc = [] {
        ExperimentConfig config;
        const RocketTask task = make_rocket_task(config.gamma, Seed{21});
        return session_to_json(simulate_session(task, 1.0, 0.1, config, Seed{5}));
    }();
    return doc;
}

bool has_error(const ValidationResult& r, const std::string& path, const std::string& fragment) {
    for (const auto& e : r.errors)
        if (e.path == path && e.message.find(fragment) != std::string::npos) return true;
    return false;
}

std::size_t first_transfer(const json& doc) {
    for (std::size_t k = 0; k < doc["trials"].size(); ++k)
        if (doc["trials"][k]["phase"] == "transfer") return k;
    return doc["trials"].size();
}

}  // namespace

TEST(SessionSchema, SimulatedDocumentIsValid) {
    const json doc = base_session();
    EXPECT_EQ(doc["schema"], std::string(session_schema_tag));
    EXPECT_TRUE(validate_session(doc).ok());
}

TEST(SessionSchema, RtAboveWindow) {
    json doc = base_session();
    doc["trials"][0]["rt_ms"] = 6000;
    EXPECT_TRUE(has_error(validate_session(doc), "$.trials[0].rt_ms", "rt exceeds 5000 ms"));
    doc["trials"][0]["rt_ms"] = 0;
    EXPECT_TRUE(has_error(validate_session(doc), "$.trials[0].rt_ms", "positive"));
}

TEST(SessionSchema, SeventeenTransferTrials) {
    json doc = base_session();
    doc["trials"].erase(doc["trials"].size() - 1);
    EXPECT_TRUE(has_error(validate_session(doc), "$.trials", "expected 18"));
}

TEST(SessionSchema, TimeoutConsistency) {
    json doc = base_session();
    auto& t = doc["trials"][first_transfer(doc)];
    t["response"] = "timeout";
    t["correct"] = false;
    t["rt_ms"] = 1200;
    const std::string path = "$.trials[" + std::to_string(first_transfer(doc)) + "]";
    EXPECT_TRUE(has_error(validate_session(doc), path + ".rt_ms", "timeout"));
    t["rt_ms"] = 5000;
    t["correct"] = true;
    EXPECT_TRUE(has_error(validate_session(doc), path + ".correct", "cannot be correct"));
}

TEST(SessionSchema, CorrectFlagFollowsRule) {
    json doc = base_session();
    auto& t = doc["trials"][first_transfer(doc)];
    if (t["response"] == "timeout") GTEST_SKIP() << "first transfer trial timed out";
    t["correct"] = !t["correct"].get<bool>();
    EXPECT_FALSE(validate_session(doc).ok());
}

TEST(SessionSchema, StreakResetsOnError) {
    json doc = base_session();
    // The learning phase ends with a run of 15 correct trials; breaking the
    // last one leaves the phase unfinished.
    const std::size_t last = first_transfer(doc) - 1;
    auto& t = doc["trials"][last];
    ASSERT_TRUE(t["correct"].get<bool>());
    t["response"] = t["response"] == "yes" ? "no" : "yes";
    t["correct"] = false;
    EXPECT_TRUE(has_error(validate_session(doc), "$.trials[" + std::to_string(last) + "]",
                          "does not end with 15"));
    doc["metadata"]["hard_cap_reached"] = true;
    EXPECT_TRUE(validate_session(doc).ok());
}

TEST(SessionSchema, LearningMustStopAtStreak) {
    json doc = base_session();
    const std::size_t last = first_transfer(doc) - 1;
    json extra = doc["trials"][last];
    doc["trials"].insert(doc["trials"].begin() + static_cast<std::ptrdiff_t>(last + 1), extra);
    EXPECT_TRUE(has_error(validate_session(doc), "$.trials[" + std::to_string(last + 1) + "]",
                          "continues after 15"));
}

TEST(SessionSchema, FieldErrorsAreCollected) {
    json doc = base_session();
    doc.erase("participant_id");
    doc["group"] = "teachers";
    doc["rule"]["characteristic"] = "wings";
    doc["trials"][1]["nature"] = "01x1";
    const auto r = validate_session(doc);
    EXPECT_TRUE(has_error(r, "$.participant_id", "missing"));
    EXPECT_TRUE(has_error(r, "$.group", "unknown group"));
    EXPECT_TRUE(has_error(r, "$.rule.characteristic", "unknown"));
    EXPECT_TRUE(has_error(r, "$.trials[1].nature", "0/1"));
    EXPECT_FALSE(r.session);
}

TEST(SessionSchema, ParseErrorAndNonObject) {
    const auto r = validate_session(std::string_view("{not json"));
    EXPECT_TRUE(r.parse_error);
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_TRUE(has_error(validate_session(json::array()), "$", "object"));
}

TEST(SessionSchema, WithdrawnSkipsProtocol) {
    json doc = base_session();
    doc["trials"] = json::array({doc["trials"][0]});
    EXPECT_FALSE(validate_session(doc).ok());
    doc["metadata"]["withdrawn"] = true;
    EXPECT_TRUE(validate_session(doc).ok());
}

TEST(SessionSchema, TransferBeforeLearningEnds) {
    json doc = base_session();
    std::swap(doc["trials"][0], doc["trials"][first_transfer(doc)]);
    EXPECT_FALSE(validate_session(doc).ok());
}

TEST(SessionSchema, FromJsonThrowsWithPaths) {
    json doc = base_session();
    doc["trials"][0]["rt_ms"] = 6000;
    try {
        session_from_json(doc);
        FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("$.trials[0].rt_ms"), std::string::npos);
    }
}

TEST(Rule, SaysYes) {
    const Rule r{1, 1};
    EXPECT_TRUE(r.says_yes("0100"));
    EXPECT_FALSE(r.says_yes("1011"));
    EXPECT_EQ(parse_group("middle_school"), Group::middle_school);
    EXPECT_FALSE(parse_group("x"));
}

TEST(SessionSchema, PublishedSchemaMatchesValidator) {
    const json schema = json::parse(read_file(std::string(RACELAB_SOURCE_DIR) + "/docs/session.schema.json"));
    EXPECT_EQ(schema["properties"]["schema"]["const"], std::string(session_schema_tag));
    std::vector<std::string> groups;
    for (Group g : {Group::middle_school, Group::undergraduate, Group::simulated}) groups.emplace_back(to_string(g));
    EXPECT_EQ(schema["properties"]["group"]["enum"].get<std::vector<std::string>>(), groups);
    std::vector<std::string> names(characteristic_names.begin(), characteristic_names.end());
    EXPECT_EQ(schema["properties"]["rule"]["properties"]["characteristic"]["enum"].get<std::vector<std::string>>(),
              names);
    const json& trial = schema["properties"]["trials"]["items"]["properties"];
    EXPECT_EQ(trial["rt_ms"]["maximum"], response_window_ms);
    for (const auto& field : schema["properties"]["trials"]["items"]["required"])
        EXPECT_TRUE(session_to_json(Session{"p", Group::simulated, {}, {SessionTrial{}}, false, false, {}})["trials"][0]
                        .contains(field.get<std::string>()));
}
