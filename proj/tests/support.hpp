#pragma once

// Shared fixtures and independent reference implementations for the test
// binaries. Nothing here calls into the library's own formulas unless noted.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gesturescope/gesture.hpp"
#include "gesturescope/ingest.hpp"
#include "gesturescope/similarity.hpp"

namespace testsupport {

using gesturescope::NormalizedSkeleton;
using gesturescope::PoseFrame;

inline std::filesystem::path fixture_dir() { return std::filesystem::path(GESTURESCOPE_FIXTURES) / "speaker30"; }

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    static std::mt19937_64 rng(std::random_device{}());
    auto dir = std::filesystem::temp_directory_path() / ("gesturescope-" + name + "-" + std::to_string(rng() % 1000000000));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline NormalizedSkeleton random_skeleton(std::mt19937_64& rng, bool allow_zero_conf = true) {
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::uniform_real_distribution<double> conf(0.05, 1.0);
    std::bernoulli_distribution drop(0.15);
    NormalizedSkeleton s;
    for (auto& k : s.keypoints) {
        k.x = coord(rng);
        k.y = coord(rng);
        k.confidence = allow_zero_conf && drop(rng) ? 0.0 : conf(rng);
    }
    s.keypoints[0].confidence = conf(rng);  // keep at least one positive weight
    return s;
}

inline NormalizedSkeleton uniform_skeleton(double x, double y, double conf = 1.0) {
    NormalizedSkeleton s;
    for (auto& k : s.keypoints) k = {x, y, conf};
    return s;
}

// D(F,G) evaluated straight from its definition, term by term.
inline double oracle_frame_distance(const NormalizedSkeleton& f, const NormalizedSkeleton& g) {
    long double num = 0.0L;
    long double den = 0.0L;
    for (std::size_t k = 0; k < gesturescope::kUpperBodyKeypoints; ++k) {
        const long double c = f.keypoints[k].confidence;
        const long double dx = static_cast<long double>(f.keypoints[k].x) - g.keypoints[k].x;
        const long double dy = static_cast<long double>(f.keypoints[k].y) - g.keypoints[k].y;
        num += c * std::sqrt(dx * dx + dy * dy);
        den += c;
    }
    return static_cast<double>(num / den);
}

// Enumerates every monotone warping path with steps (1,0),(0,1),(1,1) and
// returns min-cost / length, preferring the shorter path on cost ties.
// Cell costs come from the caller so the path search is tested on its own.
inline double oracle_dtw(const std::vector<std::vector<double>>& cost, std::uint64_t* paths_seen = nullptr) {
    const std::size_t n = cost.size();
    const std::size_t m = cost[0].size();
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_len = 0;
    std::function<void(std::size_t, std::size_t, double, std::size_t)> walk = [&](std::size_t i, std::size_t j,
                                                                                  double acc, std::size_t len) {
        if (i == n - 1 && j == m - 1) {
            if (paths_seen != nullptr) ++*paths_seen;
            if (acc < best_cost || (acc == best_cost && len < best_len)) {
                best_cost = acc;
                best_len = len;
            }
            return;
        }
        if (i + 1 < n) walk(i + 1, j, acc + cost[i + 1][j], len + 1);
        if (j + 1 < m) walk(i, j + 1, acc + cost[i][j + 1], len + 1);
        if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc + cost[i + 1][j + 1], len + 1);
    };
    walk(0, 0, cost[0][0], 1);
    return best_cost / static_cast<double>(best_len);
}

// Number of monotone paths (Delannoy number), used to check the oracle itself.
inline std::uint64_t delannoy(std::size_t n, std::size_t m) {
    std::vector<std::vector<std::uint64_t>> d(n + 1, std::vector<std::uint64_t>(m + 1, 1));
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) d[i][j] = d[i - 1][j] + d[i][j - 1] + d[i - 1][j - 1];
    }
    return d[n][m];
}

// Pixel-space frame with every BODY_25 keypoint placed at random around a body.
inline PoseFrame random_pose_frame(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> px(100.0, 1100.0);
    std::uniform_real_distribution<double> conf(0.1, 1.0);
    PoseFrame f;
    for (auto& k : f.keypoints) k = {px(rng), px(rng), conf(rng)};
    return f;
}

// Upper-body skeleton with shoulders at +-0.15 and the given wrists; other
// keypoints sit on the torso midline.
inline NormalizedSkeleton arms_pose(double rx, double ry, double lx, double ly) {
    NormalizedSkeleton s;
    auto set = [&s](std::size_t k, double x, double y) { s.keypoints[k] = {x, y, 1.0}; };
    set(0, 0.0, 0.0);
    set(1, 0.0, -0.1);
    set(2, -0.15, -0.12);
    set(5, 0.15, -0.12);
    set(3, (rx - 0.15) / 2, (ry - 0.12) / 2);
    set(6, (lx + 0.15) / 2, (ly - 0.12) / 2);
    set(4, rx, ry);
    set(7, lx, ly);
    set(8, 0.0, -0.45);
    return s;
}

}  // namespace testsupport
