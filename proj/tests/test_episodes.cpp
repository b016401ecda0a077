#include "semsentry/episodes.hpp"

#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace semsentry;
using semsentry::testing::TempDir;

namespace {

Episode small_episode() {
    Episode ep;
    ep.id = "ep-0";
    ep.scenario_class = ScenarioClass::anomalous_light;
    ep.frames = {
        Frame{0, 0.0, {Detection{"car", "on the road", 0.9}}, std::nullopt, {}},
        Frame{1, 0.5, {Detection{"traffic light", "on a truck", 0.8}}, std::nullopt, {}},
    };
    ep.anomaly_intervals = {{1, 1, AnomalyKind::traffic_light}};
    return ep;
}

TEST(Episodes, EmptyListWritesEmptyFile) {
    TempDir tmp;
    const auto path = tmp.file("episodes.jsonl");
    write_episodes({}, path);
    EXPECT_TRUE(std::filesystem::exists(path));
    EXPECT_EQ(std::filesystem::file_size(path), 0u);
    EXPECT_TRUE(read_episodes(path).empty());
}

TEST(Episodes, SingleEpisodeIsOneLineAndRoundTripsByteIdentically) {
    TempDir tmp;
    const auto path = tmp.file("episodes.jsonl");
    const std::vector<Episode> episodes = {small_episode()};
    write_episodes(episodes, path);

    const std::string first = semsentry::testing::read_file(path);
    EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 1);

    const auto loaded = read_episodes(path);
    ASSERT_EQ(loaded.size(), 1u);
    EXPECT_EQ(loaded, episodes);

    write_episodes(loaded, path);
    EXPECT_EQ(semsentry::testing::read_file(path), first);
}

TEST(Episodes, IntervalEndBeforeStartRejected) {
    Episode ep = small_episode();
    ep.anomaly_intervals = {{1, 0, AnomalyKind::traffic_light}};
    TempDir tmp;
    EXPECT_THROW(write_episodes({ep}, tmp.file("bad.jsonl")), ValidationError);
}

TEST(Episodes, OverlappingIntervalsRejectedOnLoad) {
    Episode ep = small_episode();
    ep.frames.push_back(Frame{2, 1.0, {}, std::nullopt, {}});
    ep.frames.push_back(Frame{3, 1.5, {}, std::nullopt, {}});
    ep.anomaly_intervals = {{0, 2, AnomalyKind::traffic_light},
                            {2, 3, AnomalyKind::traffic_light}};
    TempDir tmp;
    const auto path = tmp.file("overlap.jsonl");
    // bypass the write-side validation to prove the read side re-validates
    std::ofstream out(path);
    out << json(ep).dump() << "\n";
    out.close();
    try {
        read_episodes(path);
        FAIL() << "expected ValidationError-derived ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("ep-0"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("disjoint"), std::string::npos);
    }
}

TEST(Episodes, UnknownScenarioClassNamesTheBadValue) {
    TempDir tmp;
    const auto path = tmp.file("bad_class.jsonl");
    std::ofstream out(path);
    out << R"({"anomaly_intervals":[],"frames":[],"id":"x","scenario_class":"wild_class"})" << "\n";
    out.close();
    try {
        read_episodes(path);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("wild_class"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find(":1"), std::string::npos) << e.what();
    }
}

TEST(Episodes, MalformedLineReportsLineNumber) {
    TempDir tmp;
    const auto path = tmp.file("malformed.jsonl");
    std::ofstream out(path);
    out << json(small_episode()).dump() << "\n";
    out << "{not json\n";
    out.close();
    try {
        read_episodes(path);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
    }
}

TEST(Episodes, NanEmbeddingRejected) {
    Episode ep = small_episode();
    ep.frames[0].embedding = std::vector<double>{1.0, std::nan("")};
    ep.frames[1].embedding = std::vector<double>{1.0, 2.0};
    TempDir tmp;
    EXPECT_THROW(write_episodes({ep}, tmp.file("nan.jsonl")), ValidationError);
}

TEST(Episodes, MismatchedEmbeddingLengthsRejected) {
    Episode ep = small_episode();
    ep.frames[0].embedding = std::vector<double>{1.0, 2.0};
    ep.frames[1].embedding = std::vector<double>{1.0, 2.0, 3.0};
    EXPECT_THROW(validate(ep), ValidationError);
}

TEST(Episodes, NonIncreasingTimestepsRejected) {
    Episode ep = small_episode();
    ep.frames[1].timestep = 0;
    ep.anomaly_intervals.clear();
    ep.scenario_class = ScenarioClass::strange_object;
    EXPECT_THROW(validate(ep), ValidationError);
}

TEST(Episodes, IntervalOutsideFrameRangeRejected) {
    Episode ep = small_episode();
    ep.anomaly_intervals = {{1, 7, AnomalyKind::traffic_light}};
    EXPECT_THROW(validate(ep), ValidationError);
}

TEST(Episodes, NominalClassWithIntervalRejected) {
    Episode ep = small_episode();
    ep.scenario_class = ScenarioClass::nominal_light;
    EXPECT_THROW(validate(ep), ValidationError);
}

TEST(Episodes, ConfidenceOutOfRangeRejected) {
    Detection d{"car", "", 1.5};
    EXPECT_THROW(validate(d), ValidationError);
    d.confidence = -0.1;
    EXPECT_THROW(validate(d), ValidationError);
    d.confidence = 1.0;
    EXPECT_NO_THROW(validate(d));
}

// Property: read(write(x)) == x over randomized corpora.
TEST(Episodes, RoundTripProperty) {
    std::mt19937_64 rng(20240811);
    TempDir tmp;
    for (int round = 0; round < 25; ++round) {
        const auto corpus = semsentry::testing::random_corpus(rng, 8);
        const auto path = tmp.file("corpus_" + std::to_string(round) + ".jsonl");
        write_episodes(corpus, path);
        EXPECT_EQ(read_episodes(path), corpus);
    }
}

TEST(Episodes, VerdictRecordsRoundTrip) {
    MonitorVerdict v;
    v.episode_id = "ep-3";
    v.timestep = 4;
    v.per_object = {{"a car on the road", Classification::normal},
                    {"a traffic light on a truck", Classification::anomaly}};
    v.overall = Classification::anomaly;
    v.rationale = "text\nwith lines";

    VerdictRecord ok{"ep-3", 4, VerdictStatus::ok, v, ""};
    VerdictRecord bad{"ep-3", 5, VerdictStatus::unparseable, std::nullopt, "no overall line"};
    VerdictRecord failed{"ep-3", 6, VerdictStatus::backend_error, std::nullopt, "timeout"};

    TempDir tmp;
    const auto path = tmp.file("verdicts.jsonl");
    write_verdicts({ok, bad, failed}, path);
    const auto loaded = read_verdicts(path);
    ASSERT_EQ(loaded.size(), 3u);
    EXPECT_EQ(loaded[0], ok);
    EXPECT_EQ(loaded[1], bad);
    EXPECT_EQ(loaded[2], failed);
}

TEST(Episodes, VerdictStatusPayloadMismatchRejected) {
    VerdictRecord r{"ep", 0, VerdictStatus::unparseable, MonitorVerdict{"ep", 0, {}, Classification::normal, ""}, "x"};
    EXPECT_THROW(validate(r), ValidationError);
    VerdictRecord missing{"ep", 0, VerdictStatus::ok, std::nullopt, ""};
    EXPECT_THROW(validate(missing), ValidationError);
}

TEST(Episodes, MissingFileIsIoError) {
    EXPECT_THROW(read_episodes("/nonexistent/episodes.jsonl"), IoError);
}

} // namespace
