#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "gesturescope/ingest.hpp"

namespace gesturescope {

// Upper body: nose, neck, shoulders, elbows, wrists, mid-hip (BODY_25 0-8).
inline constexpr std::size_t kUpperBodyKeypoints = 9;

struct NormalizedKeypoint {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;

    bool detected() const { return confidence > 0.0; }
    bool operator==(const NormalizedKeypoint&) const = default;
};

/// Keypoints relative to the nose, divided by body height, y pointing up.
/// Undetected keypoints are stored at the origin with confidence 0.
struct NormalizedSkeleton {
    std::array<NormalizedKeypoint, kUpperBodyKeypoints> keypoints{};
    double height_estimate = 1.0;

    bool operator==(const NormalizedSkeleton&) const = default;
};

struct Rect {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
    bool strictly_contains(const Rect& inner) const;
    bool operator==(const Rect&) const = default;
};

struct GestureSpaceConfig {
    Rect center_center{-0.18, 0.18, -0.25, 0.10};
    Rect center{-0.40, 0.40, -0.45, 0.22};
    Rect periphery{-0.75, 0.75, -0.80, 0.45};
    int grid_resolution = 64;

    /// Throws ConfigError unless center_center ⊂ center ⊂ periphery strictly and resolution > 0.
    void validate() const;
    bool operator==(const GestureSpaceConfig&) const = default;
};

enum class Region { CenterCenter, Center, Periphery, Outside };
enum class GestureType { Closed, Open, Others };

std::string_view to_string(Region r);
std::string_view to_string(GestureType t);
GestureType gesture_type_from_string(std::string_view s);

struct TypingParams {
    double alpha = 0.8;  // closed when wrist distance < alpha * shoulder span
    double beta = 1.6;   // open when wrist distance > beta * shoulder span
};

enum class VariationReducer { Mean, Max, Sum };
VariationReducer variation_reducer_from_string(std::string_view s);
std::string_view to_string(VariationReducer r);

struct WordMetrics {
    std::size_t word_index = 0;
    double spatial_variation = 0.0;
    double temporal_change = 0.0;
    std::optional<NormalizedSkeleton> average;
};

/// Body height in pixels: nose-to-ankle span, else 2.2x nose-to-mid-hip,
/// else the raster height. Throws NormalizationError when the nose is undetected
/// or no rule applies.
double estimate_height(const PoseFrame& frame, std::optional<double> frame_height = std::nullopt);

NormalizedSkeleton normalize_skeleton(const PoseFrame& frame, double height, std::size_t* clamp_events = nullptr);

Region classify_region(double x, double y, const GestureSpaceConfig& config);

GestureType classify_gesture_type(const std::vector<NormalizedSkeleton>& skeletons, const TypingParams& params = {});
/// Rule applied to an already averaged skeleton.
GestureType classify_average(const NormalizedSkeleton& average, const TypingParams& params = {});

NormalizedSkeleton average_skeleton(const std::vector<NormalizedSkeleton>& skeletons);

/// Per-frame directed distance from each skeleton to the sequence average.
std::vector<double> variation_profile(const std::vector<NormalizedSkeleton>& skeletons);
double spatial_variation_raw(const std::vector<NormalizedSkeleton>& skeletons,
                             VariationReducer reducer = VariationReducer::Mean);
double temporal_change_raw(const NormalizedSkeleton& word_a_avg, const NormalizedSkeleton& word_b_avg);

/// Min-max normalization; a constant sequence maps to zeros.
std::vector<double> normalize_scores(const std::vector<double>& raw);

}  // namespace gesturescope
