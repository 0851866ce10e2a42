#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gesturescope/config.hpp"
#include "gesturescope/viewmodel.hpp"

namespace gesturescope {

inline constexpr int kBundleSchemaVersion = 1;

struct AnalysisInputs {
    std::string video_id;
    std::string title;
    PoseDocument pose;
    std::vector<TranscriptWord> words;
    std::optional<std::vector<PhraseAnnotation>> annotations;
    std::optional<EmbeddingTable> embeddings;
    // Tag untagged transcripts with the closed-class fallback tagger instead
    // of failing.
    bool fallback_tagger = false;
};

struct Diagnostics {
    std::size_t clamp_events = 0;
    std::size_t frames_without_speaker = 0;
    std::vector<MatrixDiagnostic> degenerate_segments;
    std::vector<std::size_t> untyped_segments;
    std::vector<std::size_t> unembedded_phrases;
    std::vector<std::string> notes;
};

struct WordEntry {
    TranscriptWord word;
    FrameRange frames;
    std::optional<double> spatial_variation_raw;
    std::optional<double> temporal_change_raw;
};

/// Every view model for one video. Immutable once built.
struct AnalysisBundle {
    std::string video_id;
    std::string title;
    double duration = 0.0;
    std::size_t frame_count = 0;
    AnalysisConfig config;
    double body_height = 0.0;

    std::vector<WordEntry> words;
    std::vector<TranscriptAnnotation> annotations;
    HeatmapGrid heatmap;
    TimelineSeries vertical_timeline;
    TimelineSeries horizontal_timeline;
    std::vector<PhraseSpan> phrases;
    std::vector<GestureSegment> segments;
    DistanceMatrix matrix;
    Clustering clustering;
    RelationGraph relation;
    std::optional<double> phrase_perplexity;
    std::optional<double> gesture_perplexity;
    std::vector<FrameSkeleton> frame_skeletons;  // not serialized
    Diagnostics diagnostics;
};

/// Runs the whole pipeline. Throws the module errors on invalid input.
AnalysisBundle analyze(const AnalysisInputs& inputs, const AnalysisConfig& config);

nlohmann::json skeleton_to_json(const NormalizedSkeleton& s);
nlohmann::json bundle_to_json(const AnalysisBundle& bundle);
/// Stable serialization: identical bundles give identical bytes.
std::string dump_bundle(const nlohmann::json& bundle);

/// Re-derives transcript flags from stored scores with new thresholds.
void apply_thresholds(nlohmann::json& bundle, double variation_threshold, double change_threshold);

/// Perplexity actually used for n items: the configured value, capped so
/// that it stays below the item count.
double effective_perplexity(double configured, std::size_t n);

}  // namespace gesturescope
