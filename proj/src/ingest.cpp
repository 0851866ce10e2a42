#include "gesturescope/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "gesturescope/errors.hpp"

namespace gesturescope {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<double>* EmbeddingTable::find(const std::string& word) const {
    auto it = entries.find(word);
    return it == entries.end() ? nullptr : &it->second;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

struct RawFrame {
    std::optional<std::size_t> index;
    std::optional<double> timestamp;
    std::vector<std::array<Keypoint, kBodyKeypoints>> people;
};

double number_at(const json& v, const char* what, std::size_t frame) {
    if (!v.is_number()) {
        throw SchemaError(std::string(what) + " is not a number in frame " + std::to_string(frame));
    }
    double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw SchemaError(std::string(what) + " is not finite in frame " + std::to_string(frame));
    }
    return d;
}

Keypoint make_keypoint(double x, double y, double c, std::size_t frame) {
    if (c < 0.0 || c > 1.0) {
        throw SchemaError("keypoint confidence outside [0,1] in frame " + std::to_string(frame));
    }
    return Keypoint{x, y, c};
}

std::array<Keypoint, kBodyKeypoints> parse_person(const json& person, std::size_t frame) {
    const json* kp = nullptr;
    if (person.is_object()) {
        if (person.contains("keypoints")) {
            kp = &person["keypoints"];
        } else if (person.contains("pose_keypoints_2d")) {
            kp = &person["pose_keypoints_2d"];
        }
    } else if (person.is_array()) {
        kp = &person;
    }
    if (kp == nullptr || !kp->is_array()) {
        throw SchemaError("person without keypoints in frame " + std::to_string(frame));
    }

    std::array<Keypoint, kBodyKeypoints> out{};
    const bool nested = !kp->empty() && (*kp)[0].is_array();
    if (nested) {
        if (kp->size() != kBodyKeypoints) {
            throw SchemaError("expected 25 keypoints, got " + std::to_string(kp->size()) + " in frame " +
                              std::to_string(frame));
        }
        for (std::size_t k = 0; k < kBodyKeypoints; ++k) {
            const json& t = (*kp)[k];
            if (!t.is_array() || t.size() != 3) {
                throw SchemaError("keypoint is not an [x,y,c] triple in frame " + std::to_string(frame));
            }
            out[k] = make_keypoint(number_at(t[0], "x", frame), number_at(t[1], "y", frame),
                                   number_at(t[2], "confidence", frame), frame);
        }
    } else {
        if (kp->size() != 3 * kBodyKeypoints) {
            throw SchemaError("expected 25 keypoints, got " + std::to_string(kp->size() / 3) + " in frame " +
                              std::to_string(frame));
        }
        for (std::size_t k = 0; k < kBodyKeypoints; ++k) {
            out[k] = make_keypoint(number_at((*kp)[3 * k], "x", frame), number_at((*kp)[3 * k + 1], "y", frame),
                                   number_at((*kp)[3 * k + 2], "confidence", frame), frame);
        }
    }
    return out;
}

RawFrame parse_raw_frame(const json& f, std::size_t position) {
    if (!f.is_object()) {
        throw SchemaError("frame " + std::to_string(position) + " is not an object");
    }
    RawFrame raw;
    if (auto it = f.find("index"); it != f.end()) {
        if (!it->is_number_integer() || it->get<long long>() < 0) {
            throw SchemaError("frame index must be a non-negative integer at position " + std::to_string(position));
        }
        raw.index = it->get<std::size_t>();
    }
    const std::size_t label = raw.index.value_or(position);
    for (const char* key : {"t", "timestamp"}) {
        if (auto it = f.find(key); it != f.end() && !it->is_null()) {
            raw.timestamp = number_at(*it, "timestamp", label);
            if (*raw.timestamp < 0.0) {
                throw SchemaError("negative timestamp in frame " + std::to_string(label));
            }
            break;
        }
    }
    if (auto it = f.find("people"); it != f.end()) {
        if (!it->is_array()) {
            throw SchemaError("people is not an array in frame " + std::to_string(label));
        }
        for (const auto& p : *it) {
            raw.people.push_back(parse_person(p, label));
        }
    } else if (f.contains("keypoints") || f.contains("pose_keypoints_2d")) {
        raw.people.push_back(parse_person(f, label));
    }
    return raw;
}

double mean_confidence(const std::array<Keypoint, kBodyKeypoints>& kps) {
    double s = 0.0;
    for (const auto& k : kps) s += k.confidence;
    return s / static_cast<double>(kps.size());
}

// The speaker is the person whose nose is nearest the frame center; ties go
// to the higher mean confidence. Without raster dimensions the center is the
// mean nose position of everyone in the frame.
std::array<Keypoint, kBodyKeypoints> pick_speaker(const RawFrame& raw, std::optional<double> width,
                                                  std::optional<double> height) {
    if (raw.people.empty()) {
        return {};
    }
    if (raw.people.size() == 1) {
        return raw.people.front();
    }
    double cx = 0.0;
    double cy = 0.0;
    if (width && height) {
        cx = *width / 2.0;
        cy = *height / 2.0;
    } else {
        std::size_t n = 0;
        for (const auto& p : raw.people) {
            if (p[body25::Nose].detected()) {
                cx += p[body25::Nose].x;
                cy += p[body25::Nose].y;
                ++n;
            }
        }
        if (n > 0) {
            cx /= static_cast<double>(n);
            cy /= static_cast<double>(n);
        }
    }
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    double best_conf = -1.0;
    for (std::size_t i = 0; i < raw.people.size(); ++i) {
        const auto& p = raw.people[i];
        const double dist = p[body25::Nose].detected() ? std::hypot(p[body25::Nose].x - cx, p[body25::Nose].y - cy)
                                                       : std::numeric_limits<double>::infinity();
        const double conf = mean_confidence(p);
        if (dist < best_dist || (dist == best_dist && conf > best_conf)) {
            best = i;
            best_dist = dist;
            best_conf = conf;
        }
    }
    return raw.people[best];
}

std::optional<double> optional_number(const json& doc, const char* key) {
    if (!doc.is_object()) return std::nullopt;
    auto it = doc.find(key);
    if (it == doc.end() || !it->is_number()) return std::nullopt;
    return it->get<double>();
}

PoseDocument assemble(std::vector<RawFrame> raws, std::optional<double> fps_hint, std::optional<double> width,
                      std::optional<double> height) {
    if (fps_hint && !(*fps_hint > 0.0)) {
        throw ConfigError("fps must be positive");
    }
    for (std::size_t i = 0; i < raws.size(); ++i) {
        if (!raws[i].index) raws[i].index = i;
    }
    std::stable_sort(raws.begin(), raws.end(), [](const RawFrame& a, const RawFrame& b) { return *a.index < *b.index; });

    PoseDocument doc;
    doc.frame_width = width;
    doc.frame_height = height;
    doc.frames.reserve(raws.size());
    for (std::size_t i = 0; i < raws.size(); ++i) {
        const RawFrame& raw = raws[i];
        if (i > 0 && *raw.index == *raws[i - 1].index) {
            throw SchemaError("duplicate frame index " + std::to_string(*raw.index));
        }
        PoseFrame frame;
        frame.frame_index = *raw.index;
        if (raw.timestamp) {
            frame.timestamp = *raw.timestamp;
        } else if (fps_hint) {
            frame.timestamp = static_cast<double>(*raw.index) / *fps_hint;
        } else {
            throw ConfigError("frame " + std::to_string(*raw.index) + " has no timestamp and no fps was given");
        }
        if (!doc.frames.empty() && !(frame.timestamp > doc.frames.back().timestamp)) {
            throw SchemaError("timestamps must strictly increase (frame " + std::to_string(*raw.index) + ")");
        }
        frame.keypoints = pick_speaker(raw, width, height);
        doc.frames.push_back(frame);
    }
    return doc;
}

json parse_json(std::string_view source, std::optional<std::size_t> frame = std::nullopt) {
    auto first = std::find_if_not(source.begin(), source.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (first == source.end()) {
        throw ParseError("empty input", frame);
    }
    try {
        return json::parse(source.begin(), source.end());
    } catch (const json::parse_error& e) {
        std::string msg = "malformed JSON";
        if (frame) msg += " in frame " + std::to_string(*frame);
        throw ParseError(msg + ": " + e.what(), frame);
    }
}

bool is_punctuation_only(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::ispunct(static_cast<unsigned char>(c)) || std::isspace(static_cast<unsigned char>(c));
    });
}

bool ends_sentence(const std::string& s) {
    auto it = std::find_if(s.rbegin(), s.rend(), [](char c) { return !std::isspace(static_cast<unsigned char>(c)); });
    if (it == s.rend()) return false;
    // Skip trailing closing quotes/brackets: `end."` still closes a sentence.
    while (it != s.rend() && (*it == '"' || *it == '\'' || *it == ')' || *it == ']')) ++it;
    return it != s.rend() && (*it == '.' || *it == '!' || *it == '?');
}

}  // namespace

PoseDocument parse_pose_document(std::string_view source, std::optional<double> fps_hint) {
    const json doc = parse_json(source);
    std::optional<double> width = optional_number(doc, "width");
    std::optional<double> height = optional_number(doc, "height");
    if (!fps_hint) fps_hint = optional_number(doc, "fps");

    std::vector<RawFrame> raws;
    const json* frames = nullptr;
    if (doc.is_array()) {
        frames = &doc;
    } else if (doc.is_object() && doc.contains("frames")) {
        frames = &doc["frames"];
        if (!frames->is_array()) throw SchemaError("\"frames\" is not an array");
    } else if (doc.is_object() && doc.contains("people")) {
        raws.push_back(parse_raw_frame(doc, 0));
    } else {
        throw SchemaError("unrecognised pose document layout");
    }
    if (frames != nullptr) {
        raws.reserve(frames->size());
        for (std::size_t i = 0; i < frames->size(); ++i) {
            raws.push_back(parse_raw_frame((*frames)[i], i));
        }
    }
    return assemble(std::move(raws), fps_hint, width, height);
}

std::vector<PoseFrame> parse_pose_frames(std::string_view source, std::optional<double> fps_hint) {
    return parse_pose_document(source, fps_hint).frames;
}

PoseDocument parse_pose_directory(const fs::path& dir, std::optional<double> fps_hint) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw ParseError("no per-frame JSON files in " + dir.string());
    }

    static const std::regex number_re(R"((\d+)(?:_keypoints)?$)");
    std::vector<RawFrame> raws;
    raws.reserve(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::size_t index = i;
        std::smatch m;
        const std::string stem = files[i].stem().string();
        if (std::regex_search(stem, m, number_re)) {
            index = std::stoull(m[1].str());
        }
        const json doc = parse_json(read_file(files[i]), index);
        RawFrame raw = parse_raw_frame(doc, index);
        raw.index = index;
        raws.push_back(std::move(raw));
    }
    return assemble(std::move(raws), fps_hint, std::nullopt, std::nullopt);
}

PoseDocument load_pose(const fs::path& path, std::optional<double> fps_hint) {
    if (fs::is_directory(path)) {
        return parse_pose_directory(path, fps_hint);
    }
    return parse_pose_document(read_file(path), fps_hint);
}

std::string serialize_pose_frames(const std::vector<PoseFrame>& frames) {
    json out = json::array();
    for (const auto& f : frames) {
        json kps = json::array();
        for (const auto& k : f.keypoints) {
            kps.push_back({k.x, k.y, k.confidence});
        }
        out.push_back({{"index", f.frame_index}, {"t", f.timestamp}, {"people", json::array({{{"keypoints", kps}}})}});
    }
    return json{{"frames", out}}.dump();
}

std::vector<TranscriptWord> parse_transcript(std::string_view source) {
    const json doc = parse_json(source);
    if (!doc.is_array()) {
        throw SchemaError("transcript must be a JSON array");
    }
    std::vector<TranscriptWord> all;
    all.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& w = doc[i];
        if (!w.is_object() || !w.contains("word") || !w["word"].is_string() || !w.contains("start") ||
            !w["start"].is_number() || !w.contains("end") || !w["end"].is_number()) {
            throw SchemaError("transcript entry " + std::to_string(i) + " needs word/start/end");
        }
        TranscriptWord word;
        word.text = w["word"].get<std::string>();
        word.start = w["start"].get<double>();
        word.end = w["end"].get<double>();
        if (auto it = w.find("pos"); it != w.end() && it->is_string()) {
            word.pos_tag = it->get<std::string>();
        }
        word.sentence_end = w.value("sentence_end", false) || ends_sentence(word.text);
        all.push_back(std::move(word));
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const TranscriptWord& a, const TranscriptWord& b) { return a.start < b.start; });

    std::vector<TranscriptWord> words;
    words.reserve(all.size());
    for (auto& w : all) {
        if (is_punctuation_only(w.text)) {
            if (ends_sentence(w.text) && !words.empty()) words.back().sentence_end = true;
            continue;
        }
        if (!(w.start < w.end)) {
            throw SchemaError("word \"" + w.text + "\" has start >= end");
        }
        if (!words.empty() && w.start < words.back().end) {
            throw SchemaError("word \"" + w.text + "\" overlaps \"" + words.back().text + "\"");
        }
        words.push_back(std::move(w));
    }
    return words;
}

std::string serialize_transcript(const std::vector<TranscriptWord>& words) {
    json out = json::array();
    for (const auto& w : words) {
        json j{{"word", w.text}, {"start", w.start}, {"end", w.end}};
        if (w.pos_tag) j["pos"] = *w.pos_tag;
        if (w.sentence_end && !ends_sentence(w.text)) j["sentence_end"] = true;
        out.push_back(std::move(j));
    }
    return out.dump();
}

EmbeddingTable load_embeddings(std::string_view source) {
    EmbeddingTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first_content_line = true;
    while (pos < source.size()) {
        std::size_t eol = source.find('\n', pos);
        if (eol == std::string_view::npos) eol = source.size();
        std::string_view line = source.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        std::vector<std::string_view> tokens;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            if (j > i) tokens.push_back(line.substr(i, j - i));
            i = j;
        }
        if (tokens.empty()) continue;

        // word2vec-style "<count> <dim>" header
        if (first_content_line && tokens.size() == 2 &&
            std::all_of(tokens[0].begin(), tokens[0].end(), ::isdigit) &&
            std::all_of(tokens[1].begin(), tokens[1].end(), ::isdigit)) {
            first_content_line = false;
            continue;
        }
        first_content_line = false;

        if (tokens.size() < 2) {
            throw SchemaError("line " + std::to_string(line_no) + " has no vector components");
        }
        const std::size_t d = tokens.size() - 1;
        if (table.dimension == 0) {
            table.dimension = d;
        } else if (d != table.dimension) {
            throw SchemaError("line " + std::to_string(line_no) + " has dimension " + std::to_string(d) +
                              ", expected " + std::to_string(table.dimension));
        }
        std::vector<double> v(d);
        for (std::size_t k = 0; k < d; ++k) {
            std::string_view t = tokens[k + 1];
            auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v[k]);
            if (ec != std::errc() || ptr != t.data() + t.size()) {
                throw ParseError("non-numeric component \"" + std::string(t) + "\" on line " + std::to_string(line_no));
            }
        }
        table.entries.try_emplace(std::string(tokens[0]), std::move(v));
    }
    return table;
}

FrameRange frames_in_interval(const std::vector<PoseFrame>& frames, double start, double end) {
    auto by_time = [](const PoseFrame& f, double t) { return f.timestamp < t; };
    auto lo = std::lower_bound(frames.begin(), frames.end(), start, by_time);
    auto hi = std::lower_bound(lo, frames.end(), end, by_time);
    return FrameRange{static_cast<std::size_t>(lo - frames.begin()), static_cast<std::size_t>(hi - frames.begin())};
}

std::vector<FrameRange> align(const std::vector<PoseFrame>& frames, const std::vector<TranscriptWord>& words) {
    std::vector<FrameRange> out;
    out.reserve(words.size());
    for (const auto& w : words) {
        out.push_back(frames_in_interval(frames, w.start, w.end));
    }
    return out;
}

}  // namespace gesturescope
