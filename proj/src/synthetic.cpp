#include "gesturescope/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gesturescope/semantics.hpp"

namespace gesturescope::synthetic {

using nlohmann::json;

namespace {

struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}
    double uniform() { return (static_cast<double>(engine() >> 11) + 0.5) * (1.0 / 9007199254740992.0); }
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine() % n); }
};

enum class Pose { Rest, Open, Raised, Beat };

struct HandTargets {
    double rx, ry, lx, ly;
};

HandTargets targets(Pose p) {
    switch (p) {
        case Pose::Rest: return {625, 400, 655, 400};
        case Pose::Open: return {400, 330, 880, 330};
        case Pose::Raised: return {540, 110, 740, 110};
        case Pose::Beat: return {610, 360, 690, 440};
    }
    return {625, 400, 655, 400};
}

struct Template {
    std::vector<std::pair<const char*, const char*>> words;
    Pose pose;
};

const std::vector<Template>& templates() {
    static const std::vector<Template> t{
        {{{"the", "DET"}, {"speaker", "NOUN"}, {"tells", "VERB"}, {"a", "DET"}, {"story", "NOUN"}}, Pose::Open},
        {{{"I", "PRON"}, {"will", "AUX"}, {"tell", "VERB"}, {"you", "PRON"}, {"about", "ADP"}, {"pros", "NOUN"},
          {"and", "CCONJ"}, {"cons", "NOUN"}},
         Pose::Beat},
        {{{"our", "DET"}, {"team", "NOUN"}, {"works", "VERB"}, {"in", "ADP"}, {"Germany", "PROPN"}}, Pose::Rest},
        {{{"people", "NOUN"}, {"in", "ADP"}, {"America", "PROPN"}, {"and", "CCONJ"}, {"Singapore", "PROPN"},
          {"love", "VERB"}, {"good", "ADJ"}, {"ideas", "NOUN"}},
         Pose::Open},
        {{{"let", "VERB"}, {"me", "PRON"}, {"tell", "VERB"}, {"you", "PRON"}, {"a", "DET"}, {"big", "ADJ"},
          {"secret", "NOUN"}},
         Pose::Raised},
        {{{"the", "DET"}, {"data", "NOUN"}, {"shows", "VERB"}, {"clear", "ADJ"}, {"growth", "NOUN"}}, Pose::Beat},
        {{{"we", "PRON"}, {"open", "VERB"}, {"our", "DET"}, {"arms", "NOUN"}, {"to", "ADP"}, {"the", "DET"},
          {"audience", "NOUN"}},
         Pose::Open},
        {{{"this", "DET"}, {"tiny", "ADJ"}, {"detail", "NOUN"}, {"matters", "VERB"}}, Pose::Rest},
    };
    return t;
}

std::array<Keypoint, kBodyKeypoints> body(const HandTargets& h) {
    std::array<Keypoint, kBodyKeypoints> k{};
    auto set = [&k](std::size_t i, double x, double y) { k[i] = {x, y, 0.9}; };
    set(body25::Nose, 640, 150);
    set(body25::Neck, 640, 215);
    set(body25::RShoulder, 575, 225);
    set(body25::LShoulder, 705, 225);
    set(body25::MidHip, 640, 450);
    set(9, 610, 450);
    set(12, 670, 450);
    set(10, 612, 590);
    set(13, 668, 590);
    set(body25::RAnkle, 615, 730);
    set(body25::LAnkle, 665, 730);
    set(body25::RWrist, h.rx, h.ry);
    set(body25::LWrist, h.lx, h.ly);
    // Elbows bend outward between shoulder and wrist.
    set(body25::RElbow, (575 + h.rx) / 2 - 25, (225 + h.ry) / 2 + 10);
    set(body25::LElbow, (705 + h.lx) / 2 + 25, (225 + h.ly) / 2 + 10);
    for (std::size_t i = 15; i < kBodyKeypoints; ++i) k[i] = {};
    return k;
}

std::vector<double> embedding_for(const std::string& word, Rng& rng) {
    static const std::map<std::string, int> groups{
        {"germany", 1}, {"america", 1}, {"singapore", 1}, {"pros", 2},    {"cons", 2},   {"tell", 3},
        {"tells", 3},   {"shows", 3},   {"love", 3},      {"story", 4},   {"secret", 4}, {"ideas", 4},
        {"data", 5},    {"growth", 5},  {"team", 6},      {"people", 6},  {"audience", 6}, {"speaker", 6}};
    std::vector<double> v(8);
    for (double& x : v) x = 0.3 * rng.normal();
    if (auto it = groups.find(word); it != groups.end()) {
        v[static_cast<std::size_t>(it->second)] += 2.0;
    }
    return v;
}

}  // namespace

SpeakerFixture make_speaker(const SpeakerOptions& opt) {
    Rng rng(opt.seed);
    SpeakerFixture fx;

    // Transcript and a per-sentence pose schedule.
    struct Span {
        double start, end;
        Pose pose;
    };
    std::vector<Span> schedule;
    double t = 0.2;
    const auto& tpl = templates();
    while (true) {
        const Template& s = tpl[rng.below(tpl.size())];
        const double sentence_len = static_cast<double>(s.words.size()) * opt.word_seconds;
        if (t + sentence_len + 0.1 > opt.seconds) break;
        const double begin = t;
        for (const auto& [text, tag] : s.words) {
            const double dur = opt.word_seconds * (0.8 + 0.15 * rng.uniform());
            fx.words.push_back({text, t, t + dur, std::string(tag), false});
            t += opt.word_seconds;
        }
        fx.words.push_back({".", t - 0.02, t - 0.02, std::string("PUNCT"), false});
        schedule.push_back({begin, t, s.pose});
        t += opt.sentence_pause;
    }

    // Frames.
    const auto frame_count = static_cast<std::size_t>(std::floor(opt.seconds * opt.fps));
    std::size_t span_idx = 0;
    Pose previous = Pose::Rest;
    Pose current = Pose::Rest;
    double blend_start = 0.0;
    for (std::size_t i = 0; i < frame_count; ++i) {
        const double ts = static_cast<double>(i) / opt.fps;
        while (span_idx < schedule.size() && ts >= schedule[span_idx].start) {
            previous = current;
            current = schedule[span_idx].pose;
            blend_start = schedule[span_idx].start;
            ++span_idx;
        }
        const HandTargets from = targets(previous);
        const HandTargets goal = targets(current);
        const double a = 0.5 - 0.5 * std::cos(M_PI * std::clamp((ts - blend_start) / 0.3, 0.0, 1.0));
        HandTargets h{from.rx + a * (goal.rx - from.rx), from.ry + a * (goal.ry - from.ry),
                      from.lx + a * (goal.lx - from.lx), from.ly + a * (goal.ly - from.ly)};
        if (current == Pose::Beat) {
            h.rx += 20 * std::sin(2 * M_PI * 2.0 * ts);
            h.ry += 15 * std::sin(2 * M_PI * 2.0 * ts);
        }

        PoseFrame f;
        f.frame_index = i;
        f.timestamp = ts;
        f.keypoints = body(h);
        for (auto& k : f.keypoints) {
            if (!k.detected()) continue;
            k.x += opt.jitter_px * rng.normal();
            k.y += opt.jitter_px * rng.normal();
            k.confidence = std::clamp(0.85 + 0.1 * rng.uniform(), 0.0, 1.0);
        }
        if (opt.dropouts) {
            const auto period = static_cast<std::size_t>(7.0 * opt.fps);
            if (i % period >= period - 3) f.keypoints[body25::LWrist] = {};
            const auto nose_period = static_cast<std::size_t>(19.0 * opt.fps);
            if (i % nose_period == nose_period - 1) f.keypoints[body25::Nose] = {};
        }
        fx.pose.frames.push_back(f);
    }
    fx.pose.frame_width = 1280;
    fx.pose.frame_height = 720;

    json frames = json::array();
    for (const auto& f : fx.pose.frames) {
        auto person = [](const std::array<Keypoint, kBodyKeypoints>& kps) {
            json flat = json::array();
            for (const auto& k : kps) {
                flat.push_back(k.x);
                flat.push_back(k.y);
                flat.push_back(k.confidence);
            }
            return json{{"pose_keypoints_2d", flat}};
        };
        json people = json::array({person(f.keypoints)});
        if (opt.audience && f.frame_index % 5 == 0) {
            auto other = f.keypoints;
            for (auto& k : other) {
                if (k.detected()) k.x += 500;
            }
            people.push_back(person(other));
        }
        frames.push_back({{"index", f.frame_index}, {"t", f.timestamp}, {"people", people}});
    }
    fx.pose_json = json{{"width", 1280}, {"height", 720}, {"frames", frames}}.dump();

    json words = json::array();
    for (const auto& w : fx.words) {
        words.push_back({{"word", w.text}, {"start", w.start}, {"end", w.end}, {"pos", *w.pos_tag}});
    }
    fx.transcript_json = words.dump(1);

    std::set<std::string> vocab;
    for (const auto& tp : tpl) {
        for (const auto& [text, tag] : tp.words) vocab.insert(normalize_token(text));
    }
    std::ostringstream emb;
    emb.precision(6);
    Rng erng(opt.seed ^ 0x5eedULL);
    for (const auto& w : vocab) {
        emb << w;
        for (double x : embedding_for(w, erng)) emb << ' ' << std::fixed << x;
        emb << '\n';
    }
    fx.embeddings_text = emb.str();
    return fx;
}

}  // namespace gesturescope::synthetic
