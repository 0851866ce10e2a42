#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gesturescope/gesture.hpp"
#include "gesturescope/semantics.hpp"
#include "gesturescope/similarity.hpp"
#include "gesturescope/tsne.hpp"

namespace gesturescope {

/// Normalized skeleton for one video frame, absent when the speaker's nose
/// was not detected.
struct FrameSkeleton {
    double timestamp = 0.0;
    std::optional<NormalizedSkeleton> skeleton;
};

struct GestureSegment {
    std::size_t id = 0;
    std::optional<std::size_t> phrase_ref;
    std::size_t word_begin = 0;  // inclusive
    std::size_t word_end = 0;    // exclusive
    FrameRange frame_range;
    std::vector<NormalizedSkeleton> skeletons;
    GestureType gesture_type = GestureType::Others;
    NormalizedSkeleton average;
    std::vector<double> variation_profile;

    bool degenerate() const { return skeletons.empty(); }
};

/// R x R counts over [-1,1]^2. Row 0 is the top (y = +1), column 0 the left (x = -1).
struct HeatmapGrid {
    int resolution = 0;
    std::vector<std::uint64_t> cells;
    std::uint64_t total_samples = 0;

    std::uint64_t at(int row, int col) const { return cells[static_cast<std::size_t>(row) * resolution + col]; }
    std::string to_pgm() const;
};

/// Grid cell (row, col) for a point, clamping the +1 edge into the last cell.
std::pair<int, int> heatmap_cell(double x, double y, int resolution);

enum class TimelineAxis { VerticalPosition, HorizontalPosition };

struct TimelineSample {
    double timestamp = 0.0;
    std::optional<double> right_hand;
    std::optional<double> left_hand;
};

struct TimelineSeries {
    TimelineAxis axis = TimelineAxis::VerticalPosition;
    std::vector<TimelineSample> samples;
};

struct TranscriptAnnotation {
    std::size_t word_index = 0;
    std::optional<NormalizedSkeleton> mini_skeleton;
    double spatial_variation = 0.0;
    double temporal_change = 0.0;
    bool high_variation_flag = false;
    bool large_change_flag = false;
};

struct GlyphModel {
    std::size_t segment_id = 0;
    NormalizedSkeleton average;
    GestureType gesture_type = GestureType::Others;
    std::vector<double> radial_variation;
};

struct PhraseNode {
    std::size_t phrase_id = 0;
    std::optional<Point2> point;
};

struct GestureNode {
    std::size_t segment_id = 0;
    std::optional<Point2> point;
    std::optional<GlyphModel> glyph;
};

struct RelationLink {
    std::size_t phrase_id = 0;
    std::size_t segment_id = 0;
    bool operator==(const RelationLink&) const = default;
    auto operator<=>(const RelationLink&) const = default;
};

struct RelationGraph {
    std::vector<PhraseNode> phrase_nodes;
    std::vector<GestureNode> gesture_nodes;
    std::vector<RelationLink> links;
};

struct TrajectoryPoint {
    double timestamp = 0.0;
    double x = 0.0;
    double y = 0.0;
};
struct TrajectoryGap {};
using TrajectoryItem = std::variant<TrajectoryPoint, TrajectoryGap>;

struct Trajectory {
    std::vector<TrajectoryItem> right_hand;
    std::vector<TrajectoryItem> left_hand;
};

HeatmapGrid build_heatmap(const std::vector<NormalizedSkeleton>& skeletons, const GestureSpaceConfig& config);

/// (vertical positions over time, horizontal positions over time).
std::pair<TimelineSeries, TimelineSeries> build_timelines(const std::vector<FrameSkeleton>& frames);

std::vector<TranscriptAnnotation> annotate_transcript(const std::vector<WordMetrics>& metrics, double change_threshold = 0.5,
                                                      double variation_threshold = 0.4);

struct ProjectionParams {
    std::uint64_t seed = 42;
    double perplexity = 10.0;
    int iterations = 1000;
};

/// t-SNE over Euclidean distances between vectors; output fits [-1,1]^2.
std::vector<Point2> project_2d(const std::vector<std::vector<double>>& vectors, const ProjectionParams& params);
/// t-SNE over a precomputed symmetric distance matrix (the listed rows only).
std::vector<Point2> project_2d(const DistanceMatrix& matrix, const std::vector<std::size_t>& rows,
                               const ProjectionParams& params);

RelationGraph build_relation_graph(const std::vector<PhraseSpan>& phrases, const std::vector<GestureSegment>& segments,
                                   const std::vector<std::optional<Point2>>& phrase_points,
                                   const std::vector<std::optional<Point2>>& gesture_points,
                                   const std::vector<bool>& phrase_included, std::size_t glyph_samples = 24);

GlyphModel build_glyph(const GestureSegment& segment, std::size_t samples = 24);

/// Linear resampling onto `samples` evenly spaced positions.
std::vector<double> resample_linear(const std::vector<double>& values, std::size_t samples);

Trajectory build_trajectory(const std::vector<FrameSkeleton>& frames);

/// Case-insensitive exact-token search.
std::vector<std::size_t> search_keyword(const std::vector<TranscriptWord>& words, std::string_view query);

}  // namespace gesturescope
