#include "gesturescope/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gesturescope/errors.hpp"

namespace gesturescope {

using nlohmann::json;

double effective_perplexity(double configured, std::size_t n) {
    const double cap = std::max(1.0, (static_cast<double>(n) - 1.0) / 3.0);
    return std::min(configured, cap);
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

std::vector<NormalizedSkeleton> skeletons_in(const std::vector<FrameSkeleton>& frames, FrameRange range) {
    std::vector<NormalizedSkeleton> out;
    for (std::size_t f = range.begin; f < range.end && f < frames.size(); ++f) {
        if (frames[f].skeleton) out.push_back(*frames[f].skeleton);
    }
    return out;
}

std::vector<FrameSkeleton> normalize_frames(const PoseDocument& pose, AnalysisBundle& bundle) {
    // One body height per video (median of per-frame estimates) so detector
    // jitter in the ankles does not rescale individual frames.
    std::vector<double> heights;
    for (const auto& f : pose.frames) {
        if (!f.keypoints[body25::Nose].detected()) continue;
        try {
            heights.push_back(estimate_height(f, pose.frame_height));
        } catch (const NormalizationError&) {
        }
    }
    std::vector<FrameSkeleton> out;
    out.reserve(pose.frames.size());
    if (heights.empty()) {
        bundle.diagnostics.notes.push_back("no frame allowed a body-height estimate; all frames skipped");
        for (const auto& f : pose.frames) out.push_back({f.timestamp, std::nullopt});
        bundle.diagnostics.frames_without_speaker = pose.frames.size();
        return out;
    }
    bundle.body_height = median(std::move(heights));
    for (const auto& f : pose.frames) {
        if (!f.keypoints[body25::Nose].detected()) {
            ++bundle.diagnostics.frames_without_speaker;
            out.push_back({f.timestamp, std::nullopt});
            continue;
        }
        out.push_back({f.timestamp, normalize_skeleton(f, bundle.body_height, &bundle.diagnostics.clamp_events)});
    }
    return out;
}

void compute_word_metrics(AnalysisBundle& b, const std::vector<PoseFrame>& frames, const std::vector<TranscriptWord>& words) {
    const std::vector<FrameRange> ranges = align(frames, words);
    std::vector<WordMetrics> metrics(words.size());
    std::vector<double> spatial;
    std::vector<double> temporal;
    std::optional<NormalizedSkeleton> previous;
    for (std::size_t i = 0; i < words.size(); ++i) {
        WordEntry entry{words[i], ranges[i], std::nullopt, std::nullopt};
        metrics[i].word_index = i;
        const auto skeletons = skeletons_in(b.frame_skeletons, ranges[i]);
        if (!skeletons.empty()) {
            metrics[i].average = average_skeleton(skeletons);
            entry.spatial_variation_raw = spatial_variation_raw(skeletons, b.config.variation_reducer);
            entry.temporal_change_raw = previous ? temporal_change_raw(*previous, *metrics[i].average) : 0.0;
            previous = metrics[i].average;
            spatial.push_back(*entry.spatial_variation_raw);
            temporal.push_back(*entry.temporal_change_raw);
        }
        b.words.push_back(std::move(entry));
    }
    const auto spatial_n = normalize_scores(spatial);
    const auto temporal_n = normalize_scores(temporal);
    std::size_t k = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (!b.words[i].spatial_variation_raw) continue;
        metrics[i].spatial_variation = spatial_n[k];
        metrics[i].temporal_change = temporal_n[k];
        ++k;
    }
    b.annotations = annotate_transcript(metrics, b.config.change_threshold, b.config.variation_threshold);
}

std::vector<PhraseSpan> build_phrases(const AnalysisInputs& in) {
    if (in.annotations) return phrases_from_annotations(in.words, *in.annotations);
    const bool tagged = std::all_of(in.words.begin(), in.words.end(),
                                    [](const TranscriptWord& w) { return w.pos_tag.has_value(); });
    if (!tagged && in.fallback_tagger) {
        std::vector<TranscriptWord> words = in.words;
        tag_closed_class(words);
        return extract_phrases(words);
    }
    return extract_phrases(in.words);
}

void build_segments(AnalysisBundle& b, const std::vector<PoseFrame>& frames) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> by_range;
    for (const auto& p : b.phrases) {
        const auto key = std::pair{p.word_begin, p.word_end};
        if (by_range.count(key)) continue;
        by_range[key] = b.segments.size();

        GestureSegment seg;
        seg.id = b.segments.size();
        seg.phrase_ref = p.id;
        seg.word_begin = p.word_begin;
        seg.word_end = p.word_end;
        seg.frame_range = frames_in_interval(frames, p.start, p.end);
        seg.skeletons = skeletons_in(b.frame_skeletons, seg.frame_range);
        if (!seg.skeletons.empty()) {
            seg.average = average_skeleton(seg.skeletons);
            seg.variation_profile = variation_profile(seg.skeletons);
            try {
                seg.gesture_type = classify_gesture_type(seg.skeletons, b.config.typing);
            } catch (const TypingError&) {
                seg.gesture_type = GestureType::Others;
                b.diagnostics.untyped_segments.push_back(seg.id);
            }
        }
        b.segments.push_back(std::move(seg));
    }
}

void build_similarity(AnalysisBundle& b) {
    std::vector<SkeletonSequence> sequences;
    sequences.reserve(b.segments.size());
    for (const auto& s : b.segments) sequences.push_back(s.skeletons);
    b.matrix = distance_matrix(sequences, &b.diagnostics.degenerate_segments);

    const std::size_t valid = b.matrix.valid_indices().size();
    ClusterCut cut = b.config.cluster_cut;
    if (auto* c = std::get_if<ClusterCount>(&cut); c && c->clusters > valid) {
        b.diagnostics.notes.push_back("cluster_count " + std::to_string(c->clusters) + " exceeds " +
                                      std::to_string(valid) + " clusterable segments; using " + std::to_string(valid));
        c->clusters = valid;
    }
    if (valid > 0) {
        b.clustering = cluster(b.matrix, cut);
    } else {
        b.clustering.labels.assign(b.segments.size(), -1);
    }
}

void build_relation(AnalysisBundle& b) {
    std::vector<std::optional<Point2>> phrase_points(b.phrases.size());
    std::vector<std::optional<Point2>> gesture_points(b.segments.size());

    std::vector<std::size_t> phrase_rows;
    std::vector<std::vector<double>> vectors;
    for (std::size_t i = 0; i < b.phrases.size(); ++i) {
        if (b.phrases[i].unembedded) continue;
        phrase_rows.push_back(i);
        vectors.push_back(b.phrases[i].embedding);
    }
    if (vectors.size() >= 3) {
        const double perplexity = effective_perplexity(b.config.tsne_perplexity, vectors.size());
        b.phrase_perplexity = perplexity;
        const auto pts = project_2d(vectors, {b.config.tsne_seed, perplexity, b.config.tsne_iterations});
        for (std::size_t k = 0; k < phrase_rows.size(); ++k) phrase_points[phrase_rows[k]] = pts[k];
    } else {
        b.diagnostics.notes.push_back("fewer than 3 embedded phrases; phrase projection skipped");
    }

    const std::vector<std::size_t> rows = b.matrix.valid_indices();
    if (rows.size() >= 3) {
        const double perplexity = effective_perplexity(b.config.tsne_perplexity, rows.size());
        b.gesture_perplexity = perplexity;
        const auto pts = project_2d(b.matrix, rows, {b.config.tsne_seed, perplexity, b.config.tsne_iterations});
        for (std::size_t k = 0; k < rows.size(); ++k) gesture_points[rows[k]] = pts[k];
    } else {
        b.diagnostics.notes.push_back("fewer than 3 comparable segments; gesture projection skipped");
    }

    b.relation = build_relation_graph(b.phrases, b.segments, phrase_points, gesture_points,
                                      std::vector<bool>(b.phrases.size(), true), b.config.glyph_samples);
}

}  // namespace

AnalysisBundle analyze(const AnalysisInputs& in, const AnalysisConfig& config) {
    config.validate();
    if (in.pose.frames.empty()) throw SchemaError("pose input has no frames");
    if (in.words.empty()) throw SchemaError("transcript has no words");

    AnalysisBundle b;
    b.video_id = in.video_id;
    b.title = in.title;
    b.config = config;
    b.frame_count = in.pose.frames.size();
    b.duration = std::max(in.pose.frames.back().timestamp, in.words.back().end);

    b.frame_skeletons = normalize_frames(in.pose, b);
    compute_word_metrics(b, in.pose.frames, in.words);

    std::vector<NormalizedSkeleton> all;
    for (const auto& f : b.frame_skeletons) {
        if (f.skeleton) all.push_back(*f.skeleton);
    }
    b.heatmap = build_heatmap(all, config.space);
    auto [vertical, horizontal] = build_timelines(b.frame_skeletons);
    b.vertical_timeline = std::move(vertical);
    b.horizontal_timeline = std::move(horizontal);

    b.phrases = build_phrases(in);
    if (in.embeddings) {
        embed_phrases(b.phrases, *in.embeddings);
    } else {
        for (auto& p : b.phrases) p.unembedded = true;
        b.diagnostics.notes.push_back("no embedding table supplied");
    }
    for (const auto& p : b.phrases) {
        if (p.unembedded) b.diagnostics.unembedded_phrases.push_back(p.id);
    }

    build_segments(b, in.pose.frames);
    build_similarity(b);
    build_relation(b);
    return b;
}

// ---------------------------------------------------------------------------
// Serialization

json skeleton_to_json(const NormalizedSkeleton& s) {
    json kps = json::array();
    for (const auto& k : s.keypoints) kps.push_back({k.x, k.y, k.confidence});
    return {{"keypoints", kps}, {"height", s.height_estimate}};
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json optional_point(const std::optional<Point2>& p) { return p ? json{p->x, p->y} : json(nullptr); }

json timeline_to_json(const TimelineSeries& s) {
    json t = json::array();
    json right = json::array();
    json left = json::array();
    for (const auto& sample : s.samples) {
        t.push_back(sample.timestamp);
        right.push_back(optional_number(sample.right_hand));
        left.push_back(optional_number(sample.left_hand));
    }
    return {{"axis", s.axis == TimelineAxis::VerticalPosition ? "vertical_position" : "horizontal_position"},
            {"t", t},
            {"right_hand", right},
            {"left_hand", left}};
}

json rect_json(const Rect& r) { return {{"x", {r.x_min, r.x_max}}, {"y", {r.y_min, r.y_max}}}; }

}  // namespace

json bundle_to_json(const AnalysisBundle& b) {
    json words = json::array();
    for (std::size_t i = 0; i < b.words.size(); ++i) {
        const auto& w = b.words[i];
        const auto& a = b.annotations[i];
        json jw{{"index", i},
                {"text", w.word.text},
                {"start", w.word.start},
                {"end", w.word.end},
                {"frames", {w.frames.begin, w.frames.end}},
                {"spatial_variation_raw", optional_number(w.spatial_variation_raw)},
                {"temporal_change_raw", optional_number(w.temporal_change_raw)},
                {"spatial_variation", a.spatial_variation},
                {"temporal_change", a.temporal_change},
                {"high_variation", a.high_variation_flag},
                {"large_change", a.large_change_flag},
                {"mini_skeleton", a.mini_skeleton ? skeleton_to_json(*a.mini_skeleton) : json(nullptr)}};
        jw["pos"] = w.word.pos_tag ? json(*w.word.pos_tag) : json(nullptr);
        words.push_back(std::move(jw));
    }

    json phrases = json::array();
    for (const auto& p : b.phrases) {
        phrases.push_back({{"id", p.id},
                           {"kind", std::string(to_string(p.kind))},
                           {"words", {p.word_begin, p.word_end}},
                           {"text", p.text},
                           {"start", p.start},
                           {"end", p.end},
                           {"occurrence_count", p.occurrence_count},
                           {"unembedded", p.unembedded}});
    }

    json segments = json::array();
    for (const auto& s : b.segments) {
        json js{{"id", s.id},
                {"phrase_ref", s.phrase_ref ? json(*s.phrase_ref) : json(nullptr)},
                {"words", {s.word_begin, s.word_end}},
                {"frames", {s.frame_range.begin, s.frame_range.end}},
                {"skeleton_count", s.skeletons.size()},
                {"degenerate", s.degenerate()},
                {"cluster", s.id < b.clustering.labels.size() ? b.clustering.labels[s.id] : -1}};
        if (!s.degenerate()) {
            js["gesture_type"] = std::string(to_string(s.gesture_type));
            js["average"] = skeleton_to_json(s.average);
            js["variation_profile"] = s.variation_profile;
        } else {
            js["gesture_type"] = nullptr;
        }
        segments.push_back(std::move(js));
    }

    json matrix = json::array();
    for (std::size_t i = 0; i < b.matrix.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < b.matrix.size(); ++j) {
            row.push_back(b.matrix.valid(i) && b.matrix.valid(j) ? json(b.matrix.at(i, j)) : json(nullptr));
        }
        matrix.push_back(std::move(row));
    }

    json phrase_nodes = json::array();
    for (const auto& n : b.relation.phrase_nodes) {
        phrase_nodes.push_back({{"phrase_id", n.phrase_id}, {"point", optional_point(n.point)}});
    }
    json gesture_nodes = json::array();
    for (const auto& n : b.relation.gesture_nodes) {
        json jn{{"segment_id", n.segment_id}, {"point", optional_point(n.point)}};
        if (n.glyph) {
            jn["glyph"] = {{"gesture_type", std::string(to_string(n.glyph->gesture_type))},
                           {"average", skeleton_to_json(n.glyph->average)},
                           {"radial_variation", n.glyph->radial_variation}};
        } else {
            jn["glyph"] = nullptr;
        }
        gesture_nodes.push_back(std::move(jn));
    }
    json links = json::array();
    for (const auto& l : b.relation.links) links.push_back({l.phrase_id, l.segment_id});

    json degenerate = json::array();
    for (const auto& d : b.diagnostics.degenerate_segments) {
        degenerate.push_back({{"segment_id", d.index}, {"reason", d.reason}});
    }

    return json{
        {"schema_version", kBundleSchemaVersion},
        {"video", {{"id", b.video_id}, {"title", b.title}, {"duration", b.duration}, {"frame_count", b.frame_count}}},
        {"config", config_to_json(b.config)},
        {"body_height", b.body_height},
        {"legend",
         {{"gesture_types", {{"closed", "#4e79a7"}, {"open", "#f28e2b"}, {"others", "#bab0ac"}}},
          {"hands", {{"right", "#8e44ad"}, {"left", "#f39c12"}}},
          {"regions",
           {{"center_center", rect_json(b.config.space.center_center)},
            {"center", rect_json(b.config.space.center)},
            {"periphery", rect_json(b.config.space.periphery)}}}}},
        {"words", words},
        {"heatmap",
         {{"resolution", b.heatmap.resolution}, {"total_samples", b.heatmap.total_samples}, {"cells", b.heatmap.cells}}},
        {"timelines",
         {{"vertical", timeline_to_json(b.vertical_timeline)}, {"horizontal", timeline_to_json(b.horizontal_timeline)}}},
        {"phrases", phrases},
        {"segments", segments},
        {"distance_matrix", matrix},
        {"clustering", {{"linkage", "average"}, {"cluster_count", b.clustering.cluster_count}}},
        {"relation",
         {{"phrase_nodes", phrase_nodes},
          {"gesture_nodes", gesture_nodes},
          {"links", links},
          {"phrase_perplexity", optional_number(b.phrase_perplexity)},
          {"gesture_perplexity", optional_number(b.gesture_perplexity)},
          {"tsne_seed", b.config.tsne_seed}}},
        {"diagnostics",
         {{"clamp_events", b.diagnostics.clamp_events},
          {"frames_without_speaker", b.diagnostics.frames_without_speaker},
          {"degenerate_segments", degenerate},
          {"untyped_segments", b.diagnostics.untyped_segments},
          {"unembedded_phrases", b.diagnostics.unembedded_phrases},
          {"notes", b.diagnostics.notes}}}};
}

std::string dump_bundle(const json& bundle) { return bundle.dump(); }

void apply_thresholds(json& bundle, double variation_threshold, double change_threshold) {
    for (double t : {variation_threshold, change_threshold}) {
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("thresholds must lie in [0,1]");
    }
    for (auto& w : bundle.at("words")) {
        w["high_variation"] = w.at("spatial_variation").get<double>() > variation_threshold;
        w["large_change"] = w.at("temporal_change").get<double>() > change_threshold;
    }
    bundle["config"]["variation_threshold"] = variation_threshold;
    bundle["config"]["change_threshold"] = change_threshold;
}

}  // namespace gesturescope
