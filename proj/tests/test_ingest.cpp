#include <doctest.h>

#include <fstream>
#include <random>

#include <json.hpp>

#include "gesturescope/errors.hpp"
#include "gesturescope/ingest.hpp"
#include "support.hpp"

using namespace gesturescope;
using nlohmann::json;

namespace {

json person_nested(double conf = 1.0) {
    json kps = json::array();
    for (int k = 0; k < 25; ++k) kps.push_back({10.0 * k, 5.0 * k, conf});
    return {{"keypoints", kps}};
}

json person_flat(double nose_x, double nose_y, double conf) {
    json flat = json::array();
    for (int k = 0; k < 25; ++k) {
        flat.push_back(k == 0 ? nose_x : 10.0 * k);
        flat.push_back(k == 0 ? nose_y : 5.0 * k);
        flat.push_back(conf);
    }
    return {{"pose_keypoints_2d", flat}};
}

}  // namespace

TEST_CASE("pose: empty input is a parse error") {
    CHECK_THROWS_AS(parse_pose_frames("", 25.0), ParseError);
    CHECK_THROWS_AS(parse_pose_frames("   \n", 25.0), ParseError);
}

TEST_CASE("pose: malformed JSON reports a parse error") {
    CHECK_THROWS_AS(parse_pose_frames("{\"frames\": [", 25.0), ParseError);
}

TEST_CASE("pose: single frame at fps 25 starts at t=0") {
    json doc{{"frames", {{{"index", 0}, {"people", {person_nested()}}}}}};
    const auto frames = parse_pose_frames(doc.dump(), 25.0);
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].timestamp == 0.0);
    CHECK(frames[0].keypoints[3].x == 30.0);
    CHECK(frames[0].keypoints[3].confidence == 1.0);
}

TEST_CASE("pose: timestamps synthesized from fps hint") {
    json doc{{"frames", json::array()}};
    for (int i = 0; i < 3; ++i) doc["frames"].push_back({{"index", i}, {"people", {person_nested()}}});
    const auto frames = parse_pose_frames(doc.dump(), 10.0);
    REQUIRE(frames.size() == 3);
    CHECK(frames[0].timestamp == doctest::Approx(0.0));
    CHECK(frames[1].timestamp == doctest::Approx(0.1));
    CHECK(frames[2].timestamp == doctest::Approx(0.2));
}

TEST_CASE("pose: missing timestamps without fps is a config error") {
    json doc{{"frames", {{{"index", 0}, {"people", {person_nested()}}}}}};
    CHECK_THROWS_AS(parse_pose_frames(doc.dump()), ConfigError);
}

TEST_CASE("pose: embedded timestamps win over the fps hint") {
    json doc{{"frames", {{{"index", 0}, {"t", 1.5}, {"people", {person_nested()}}}}}};
    CHECK(parse_pose_frames(doc.dump(), 25.0)[0].timestamp == 1.5);
}

TEST_CASE("pose: wrong keypoint count is a schema error") {
    json short_person{{"keypoints", json::array({{1, 2, 1}, {3, 4, 1}})}};
    json doc{{"frames", {{{"index", 0}, {"people", {short_person}}}}}};
    CHECK_THROWS_AS(parse_pose_frames(doc.dump(), 25.0), SchemaError);

    json flat{{"pose_keypoints_2d", json::array({1, 2, 1})}};
    json doc2{{"frames", {{{"index", 0}, {"people", {flat}}}}}};
    CHECK_THROWS_AS(parse_pose_frames(doc2.dump(), 25.0), SchemaError);
}

TEST_CASE("pose: frames come back in index order") {
    json doc{{"frames", json::array()}};
    for (int i : {2, 0, 1}) doc["frames"].push_back({{"index", i}, {"people", {person_nested()}}});
    const auto frames = parse_pose_frames(doc.dump(), 10.0);
    REQUIRE(frames.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(frames[i].frame_index == i);
}

TEST_CASE("pose: duplicate index and non-increasing timestamps rejected") {
    json dup{{"frames", {{{"index", 0}, {"people", {person_nested()}}}, {{"index", 0}, {"people", {person_nested()}}}}}};
    CHECK_THROWS_AS(parse_pose_frames(dup.dump(), 10.0), SchemaError);
    json back{{"frames",
               {{{"index", 0}, {"t", 0.5}, {"people", {person_nested()}}},
                {{"index", 1}, {"t", 0.5}, {"people", {person_nested()}}}}}};
    CHECK_THROWS_AS(parse_pose_frames(back.dump()), SchemaError);
}

TEST_CASE("pose: confidence outside [0,1] rejected") {
    json doc{{"frames", {{{"index", 0}, {"people", {person_nested(1.5)}}}}}};
    CHECK_THROWS_AS(parse_pose_frames(doc.dump(), 10.0), SchemaError);
}

TEST_CASE("pose: frame without people yields an all-undetected frame") {
    json doc{{"frames", {{{"index", 0}, {"people", json::array()}}}}};
    const auto frames = parse_pose_frames(doc.dump(), 10.0);
    REQUIRE(frames.size() == 1);
    for (const auto& k : frames[0].keypoints) CHECK_FALSE(k.detected());
}

TEST_CASE("pose: speaker nearest the frame center is selected") {
    auto doc = [](json a, json b) {
        json frame{{"index", 0}, {"people", json::array({a, b})}};
        return json{{"width", 1000}, {"height", 800}, {"frames", json::array({frame})}}.dump();
    };
    CHECK(parse_pose_frames(doc(person_flat(100, 100, 0.9), person_flat(510, 390, 0.5)), 25.0)[0].keypoints[0].x ==
          510.0);
    // Equidistant noses: the more confident person wins.
    CHECK(parse_pose_frames(doc(person_flat(400, 400, 0.4), person_flat(600, 400, 0.8)), 25.0)[0].keypoints[0].x ==
          600.0);
}

TEST_CASE("pose: directory of per-frame detector files") {
    const auto dir = testsupport::scratch_dir("posedir");
    for (int i : {0, 1, 2}) {
        json f{{"version", 1.3}, {"people", {person_flat(500, 300, 0.9)}}};
        std::ofstream(dir / ("clip_00000000000" + std::to_string(i) + "_keypoints.json")) << f.dump();
    }
    const auto doc = load_pose(dir, 10.0);
    REQUIRE(doc.frames.size() == 3);
    CHECK(doc.frames[2].frame_index == 2);
    CHECK(doc.frames[2].timestamp == doctest::Approx(0.2));
    std::filesystem::remove_all(dir);
}

TEST_CASE("pose: serialize then parse is the identity") {
    std::mt19937_64 rng(11);
    std::vector<PoseFrame> frames;
    for (std::size_t i = 0; i < 20; ++i) {
        PoseFrame f = testsupport::random_pose_frame(rng);
        f.frame_index = i;
        f.timestamp = 0.04 * static_cast<double>(i) + 0.013;
        if (i % 3 == 0) f.keypoints[7] = {};
        frames.push_back(f);
    }
    CHECK(parse_pose_frames(serialize_pose_frames(frames)) == frames);
}

TEST_CASE("transcript: empty array") { CHECK(parse_transcript("[]").empty()); }

TEST_CASE("transcript: two words in order") {
    const auto w = parse_transcript(R"([{"word":"hello","start":0.0,"end":0.4},{"word":"world","start":0.5,"end":0.9}])");
    REQUIRE(w.size() == 2);
    CHECK(w[0].text == "hello");
    CHECK(w[1].text == "world");
    CHECK(w[1].start == 0.5);
    CHECK_FALSE(w[0].pos_tag.has_value());
}

TEST_CASE("transcript: out of order input is sorted") {
    const auto w = parse_transcript(
        R"([{"word":"c","start":2.0,"end":2.5},{"word":"a","start":0.0,"end":0.4},{"word":"b","start":1.0,"end":1.2,"pos":"VERB"}])");
    REQUIRE(w.size() == 3);
    CHECK(w[0].text == "a");
    CHECK(w[1].text == "b");
    CHECK(w[1].pos_tag == std::optional<std::string>("VERB"));
    CHECK(w[2].text == "c");
}

TEST_CASE("transcript: overlap and inverted intervals rejected") {
    CHECK_THROWS_AS(parse_transcript(R"([{"word":"a","start":0.0,"end":0.6},{"word":"b","start":0.5,"end":0.9}])"),
                    SchemaError);
    CHECK_THROWS_AS(parse_transcript(R"([{"word":"a","start":0.5,"end":0.5}])"), SchemaError);
    CHECK_THROWS_AS(parse_transcript(R"([{"word":"a","start":0.7,"end":0.5}])"), SchemaError);
}

TEST_CASE("transcript: punctuation tokens are dropped and close the sentence") {
    const auto w = parse_transcript(
        R"([{"word":"hi","start":0.0,"end":0.3},{"word":".","start":0.3,"end":0.3},{"word":"there","start":0.5,"end":0.8},{"word":",","start":0.8,"end":0.8}])");
    REQUIRE(w.size() == 2);
    CHECK(w[0].sentence_end);
    CHECK_FALSE(w[1].sentence_end);
}

TEST_CASE("transcript: round trip") {
    const auto w = parse_transcript(read_file(testsupport::fixture_dir() / "transcript.json"));
    REQUIRE(w.size() > 10);
    CHECK(parse_transcript(serialize_transcript(w)) == w);
}

TEST_CASE("embeddings: basic table") {
    const auto t = load_embeddings("a 1.0 2.0\n");
    CHECK(t.dimension == 2);
    REQUIRE(t.find("a") != nullptr);
    CHECK(*t.find("a") == std::vector<double>{1.0, 2.0});
    CHECK(t.find("b") == nullptr);
}

TEST_CASE("embeddings: inconsistent dimension and junk") {
    CHECK_THROWS_AS(load_embeddings("a 1 2\nb 1 2 3\n"), SchemaError);
    CHECK_THROWS_AS(load_embeddings("a 1 x\n"), ParseError);
}

TEST_CASE("embeddings: duplicates keep the first entry") {
    const auto t = load_embeddings("a 1 1\nb 0 0\na 2 2\n");
    CHECK(*t.find("a") == std::vector<double>{1.0, 1.0});
    CHECK(t.entries.size() == 2);
}

namespace {

std::vector<PoseFrame> frames_at_step(std::size_t n, double step) {
    std::vector<PoseFrame> frames(n);
    for (std::size_t i = 0; i < n; ++i) {
        frames[i].frame_index = i;
        frames[i].timestamp = static_cast<double>(i) * step;
    }
    return frames;
}

}  // namespace

TEST_CASE("align: word (0.5,0.8) over 0.1 s frames maps to 5,6,7") {
    const auto frames = frames_at_step(21, 0.1);
    const auto r = align(frames, {{"w", 0.5, 0.8, std::nullopt, false}});
    CHECK(r[0] == FrameRange{5, 8});
}

TEST_CASE("align: word after the last frame and word covering everything") {
    const auto frames = frames_at_step(21, 0.1);
    const auto r = align(frames, {{"a", 0.0, 2.5, std::nullopt, false}, {"b", 3.0, 3.5, std::nullopt, false}});
    CHECK(r[0] == FrameRange{0, 21});
    CHECK(r[1].empty());
}

TEST_CASE("align: ranges are monotone and disjoint on random transcripts") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> gap(0.0, 0.3);
    std::uniform_real_distribution<double> len(0.01, 0.6);
    const auto frames = frames_at_step(500, 0.04);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<TranscriptWord> words;
        double t = gap(rng);
        while (t < 21.0) {
            const double l = len(rng);
            words.push_back({"w", t, t + l, std::nullopt, false});
            t += l + gap(rng);
        }
        const auto r = align(frames, words);
        std::vector<int> owner(frames.size(), -1);
        for (std::size_t i = 0; i < r.size(); ++i) {
            for (std::size_t f = r[i].begin; f < r[i].end; ++f) {
                CHECK(owner[f] == -1);
                owner[f] = static_cast<int>(i);
                CHECK(frames[f].timestamp >= words[i].start);
                CHECK(frames[f].timestamp < words[i].end);
            }
            if (i > 0 && !r[i].empty() && !r[i - 1].empty()) CHECK(r[i - 1].end <= r[i].begin);
        }
    }
}
