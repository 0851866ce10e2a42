#include "gesturescope/gesture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gesturescope/errors.hpp"
#include "gesturescope/similarity.hpp"

namespace gesturescope {

bool Rect::strictly_contains(const Rect& inner) const {
    return x_min < inner.x_min && inner.x_max < x_max && y_min < inner.y_min && inner.y_max < y_max;
}

void GestureSpaceConfig::validate() const {
    for (const Rect* r : {&center_center, &center, &periphery}) {
        if (!(r->x_min < r->x_max) || !(r->y_min < r->y_max)) {
            throw ConfigError("gesture-space rectangle has non-positive extent");
        }
    }
    if (!center.strictly_contains(center_center) || !periphery.strictly_contains(center)) {
        throw ConfigError("gesture-space rectangles must nest strictly: center_center < center < periphery");
    }
    if (grid_resolution <= 0) {
        throw ConfigError("grid_resolution must be positive");
    }
}

std::string_view to_string(Region r) {
    switch (r) {
        case Region::CenterCenter: return "center_center";
        case Region::Center: return "center";
        case Region::Periphery: return "periphery";
        case Region::Outside: return "outside";
    }
    return "outside";
}

std::string_view to_string(GestureType t) {
    switch (t) {
        case GestureType::Closed: return "closed";
        case GestureType::Open: return "open";
        case GestureType::Others: return "others";
    }
    return "others";
}

GestureType gesture_type_from_string(std::string_view s) {
    if (s == "closed") return GestureType::Closed;
    if (s == "open") return GestureType::Open;
    if (s == "others") return GestureType::Others;
    throw SchemaError("unknown gesture type \"" + std::string(s) + "\"");
}

VariationReducer variation_reducer_from_string(std::string_view s) {
    if (s == "mean") return VariationReducer::Mean;
    if (s == "max") return VariationReducer::Max;
    if (s == "sum") return VariationReducer::Sum;
    throw ConfigError("unknown variation reducer \"" + std::string(s) + "\"");
}

std::string_view to_string(VariationReducer r) {
    switch (r) {
        case VariationReducer::Mean: return "mean";
        case VariationReducer::Max: return "max";
        case VariationReducer::Sum: return "sum";
    }
    return "mean";
}

double estimate_height(const PoseFrame& frame, std::optional<double> frame_height) {
    const Keypoint& nose = frame.keypoints[body25::Nose];
    if (!nose.detected()) {
        throw NormalizationError("keypoint 0 undetected in frame " + std::to_string(frame.frame_index));
    }

    const Keypoint& ra = frame.keypoints[body25::RAnkle];
    const Keypoint& la = frame.keypoints[body25::LAnkle];
    if (ra.detected() || la.detected()) {
        double y = 0.0;
        int n = 0;
        for (const Keypoint* a : {&ra, &la}) {
            if (a->detected()) {
                y += a->y;
                ++n;
            }
        }
        const double span = std::abs(y / n - nose.y);
        if (span > 0.0) return span;
    }

    const Keypoint& hip = frame.keypoints[body25::MidHip];
    if (hip.detected()) {
        const double span = 2.2 * std::abs(hip.y - nose.y);
        if (span > 0.0) return span;
    }

    if (frame_height && *frame_height > 0.0) {
        return *frame_height;
    }
    throw NormalizationError("no trunk keypoints and no frame height for frame " + std::to_string(frame.frame_index));
}

NormalizedSkeleton normalize_skeleton(const PoseFrame& frame, double height, std::size_t* clamp_events) {
    if (!(height > 0.0) || !std::isfinite(height)) {
        throw NormalizationError("height must be positive");
    }
    const Keypoint& origin = frame.keypoints[body25::Nose];
    if (!origin.detected()) {
        throw NormalizationError("keypoint 0 undetected in frame " + std::to_string(frame.frame_index));
    }

    NormalizedSkeleton out;
    out.height_estimate = height;
    std::size_t clamps = 0;
    auto clamp = [&clamps](double v) {
        if (v < -1.0) {
            ++clamps;
            return -1.0;
        }
        if (v > 1.0) {
            ++clamps;
            return 1.0;
        }
        return v;
    };
    for (std::size_t k = 0; k < kUpperBodyKeypoints; ++k) {
        const Keypoint& kp = frame.keypoints[k];
        if (!kp.detected()) continue;
        out.keypoints[k] = {clamp((kp.x - origin.x) / height), clamp((origin.y - kp.y) / height), kp.confidence};
    }
    if (clamp_events != nullptr) *clamp_events += clamps;
    return out;
}

Region classify_region(double x, double y, const GestureSpaceConfig& config) {
    if (config.center_center.contains(x, y)) return Region::CenterCenter;
    if (config.center.contains(x, y)) return Region::Center;
    if (config.periphery.contains(x, y)) return Region::Periphery;
    return Region::Outside;
}

GestureType classify_average(const NormalizedSkeleton& avg, const TypingParams& params) {
    using namespace body25;
    const auto& k = avg.keypoints;
    if (!k[RWrist].detected() || !k[LWrist].detected()) {
        throw TypingError("both wrists are required for gesture typing");
    }
    if (!k[RShoulder].detected() || !k[LShoulder].detected()) {
        throw TypingError("both shoulders are required for gesture typing");
    }

    const double shoulder_span = std::abs(k[RShoulder].x - k[LShoulder].x);
    const double wrist_dist = std::hypot(k[RWrist].x - k[LWrist].x, k[RWrist].y - k[LWrist].y);
    const double wrist_lo = std::min(k[RWrist].x, k[LWrist].x);
    const double wrist_hi = std::max(k[RWrist].x, k[LWrist].x);

    double torso_lo = std::numeric_limits<double>::infinity();
    double torso_hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i : {Neck, RShoulder, LShoulder, MidHip}) {
        if (!k[i].detected()) continue;
        torso_lo = std::min(torso_lo, k[i].x);
        torso_hi = std::max(torso_hi, k[i].x);
    }

    double all_lo = std::numeric_limits<double>::infinity();
    double all_hi = -std::numeric_limits<double>::infinity();
    for (const auto& p : k) {
        if (!p.detected()) continue;
        all_lo = std::min(all_lo, p.x);
        all_hi = std::max(all_hi, p.x);
    }

    if (wrist_dist < params.alpha * shoulder_span && wrist_lo >= torso_lo && wrist_hi <= torso_hi) {
        return GestureType::Closed;
    }
    if (wrist_dist > params.beta * shoulder_span && wrist_lo == all_lo && wrist_hi == all_hi) {
        return GestureType::Open;
    }
    return GestureType::Others;
}

GestureType classify_gesture_type(const std::vector<NormalizedSkeleton>& skeletons, const TypingParams& params) {
    if (skeletons.empty()) throw EmptySegmentError("cannot type an empty segment");
    const bool any_wrist = std::any_of(skeletons.begin(), skeletons.end(), [](const NormalizedSkeleton& s) {
        return s.keypoints[body25::RWrist].detected() || s.keypoints[body25::LWrist].detected();
    });
    if (!any_wrist) {
        throw TypingError("wrists undetected in every frame of the segment");
    }
    return classify_average(average_skeleton(skeletons), params);
}

NormalizedSkeleton average_skeleton(const std::vector<NormalizedSkeleton>& skeletons) {
    if (skeletons.empty()) {
        throw EmptySegmentError("cannot average an empty skeleton sequence");
    }
    if (skeletons.size() == 1) {
        return skeletons.front();
    }
    const double n = static_cast<double>(skeletons.size());
    NormalizedSkeleton out;
    double heights = 0.0;
    for (const auto& s : skeletons) heights += s.height_estimate;
    out.height_estimate = heights / n;

    for (std::size_t k = 0; k < kUpperBodyKeypoints; ++k) {
        double total = 0.0;
        const NormalizedKeypoint* ref = nullptr;
        for (const auto& s : skeletons) {
            const auto& p = s.keypoints[k];
            total += p.confidence;
            if (ref == nullptr && p.detected()) ref = &p;
        }
        if (!(total > 0.0)) continue;
        // Accumulate offsets from the first detected sample so coincident
        // inputs reproduce their coordinate exactly.
        double dx = 0.0;
        double dy = 0.0;
        for (const auto& s : skeletons) {
            const auto& p = s.keypoints[k];
            if (!p.detected()) continue;
            const double w = p.confidence / total;
            dx += w * (p.x - ref->x);
            dy += w * (p.y - ref->y);
        }
        out.keypoints[k] = {ref->x + dx, ref->y + dy, total / n};
    }
    return out;
}

std::vector<double> variation_profile(const std::vector<NormalizedSkeleton>& skeletons) {
    const NormalizedSkeleton avg = average_skeleton(skeletons);
    std::vector<double> profile;
    profile.reserve(skeletons.size());
    for (const auto& s : skeletons) {
        profile.push_back(frame_distance(s, avg));
    }
    return profile;
}

double spatial_variation_raw(const std::vector<NormalizedSkeleton>& skeletons, VariationReducer reducer) {
    const std::vector<double> profile = variation_profile(skeletons);
    switch (reducer) {
        case VariationReducer::Max: return *std::max_element(profile.begin(), profile.end());
        case VariationReducer::Sum: return std::accumulate(profile.begin(), profile.end(), 0.0);
        case VariationReducer::Mean: break;
    }
    return std::accumulate(profile.begin(), profile.end(), 0.0) / static_cast<double>(profile.size());
}

double temporal_change_raw(const NormalizedSkeleton& word_a_avg, const NormalizedSkeleton& word_b_avg) {
    return frame_distance_sym(word_a_avg, word_b_avg);
}

std::vector<double> normalize_scores(const std::vector<double>& raw) {
    std::vector<double> out(raw.size(), 0.0);
    if (raw.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i] = std::clamp((raw[i] - lo) / range, 0.0, 1.0);
    }
    return out;
}

}  // namespace gesturescope
