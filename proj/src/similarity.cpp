#include "gesturescope/similarity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "gesturescope/errors.hpp"

namespace gesturescope {

namespace {

double confidence_mass(const NormalizedSkeleton& s) {
    double total = 0.0;
    for (const auto& k : s.keypoints) total += k.confidence;
    return total;
}

}  // namespace

double frame_distance(const NormalizedSkeleton& f, const NormalizedSkeleton& g) {
    double weight = 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < kUpperBodyKeypoints; ++k) {
        const double c = f.keypoints[k].confidence;
        weight += c;
        if (c > 0.0) {
            acc += c * std::hypot(f.keypoints[k].x - g.keypoints[k].x, f.keypoints[k].y - g.keypoints[k].y);
        }
    }
    if (!(weight > 0.0)) {
        throw DegenerateFrameError("frame has zero total keypoint confidence");
    }
    return acc / weight;
}

double frame_distance_sym(const NormalizedSkeleton& f, const NormalizedSkeleton& g) {
    const bool fwd = confidence_mass(f) > 0.0;
    const bool bwd = confidence_mass(g) > 0.0;
    if (fwd && bwd) {
        return (frame_distance(f, g) + frame_distance(g, f)) / 2.0;
    }
    if (fwd) return frame_distance(f, g);
    if (bwd) return frame_distance(g, f);
    throw DegenerateFrameError("both frames have zero total keypoint confidence");
}

double dtw_distance(const SkeletonSequence& a, const SkeletonSequence& b) {
    if (a.empty() || b.empty()) {
        throw EmptySegmentError("DTW needs two non-empty sequences");
    }
    const std::size_t n = a.size();
    const std::size_t m = b.size();

    struct Cell {
        double cost;
        std::size_t length;
    };
    auto better = [](const Cell& x, const Cell& y) {
        return x.cost < y.cost || (x.cost == y.cost && x.length < y.length);
    };

    // Two rolling rows are enough since only the value is returned.
    std::vector<Cell> prev(m);
    std::vector<Cell> curr(m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double c = frame_distance_sym(a[i], b[j]);
            if (i == 0 && j == 0) {
                curr[j] = {c, 1};
                continue;
            }
            Cell best{std::numeric_limits<double>::infinity(), 0};
            if (i > 0 && j > 0 && better(prev[j - 1], best)) best = prev[j - 1];
            if (i > 0 && better(prev[j], best)) best = prev[j];
            if (j > 0 && better(curr[j - 1], best)) best = curr[j - 1];
            curr[j] = {best.cost + c, best.length + 1};
        }
        std::swap(prev, curr);
    }
    const Cell& end = prev[m - 1];
    return end.cost / static_cast<double>(end.length);
}

std::vector<std::size_t> DistanceMatrix::valid_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n_; ++i) {
        if (valid_[i]) out.push_back(i);
    }
    return out;
}

std::string DistanceMatrix::to_csv(const std::vector<std::string>& ids) const {
    std::ostringstream out;
    out.precision(17);
    auto id = [&](std::size_t i) { return i < ids.size() ? ids[i] : std::to_string(i); };
    for (std::size_t j = 0; j < n_; ++j) out << ',' << id(j);
    out << '\n';
    for (std::size_t i = 0; i < n_; ++i) {
        out << id(i);
        for (std::size_t j = 0; j < n_; ++j) {
            out << ',';
            if (valid_[i] && valid_[j]) out << at(i, j);
        }
        out << '\n';
    }
    return out.str();
}

DistanceMatrix distance_matrix(const std::vector<SkeletonSequence>& segments, std::vector<MatrixDiagnostic>* diagnostics,
                               unsigned threads) {
    const std::size_t n = segments.size();
    DistanceMatrix matrix(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string reason;
        if (segments[i].empty()) {
            reason = "empty segment";
        } else if (std::any_of(segments[i].begin(), segments[i].end(),
                               [](const NormalizedSkeleton& s) { return !(confidence_mass(s) > 0.0); })) {
            reason = "segment contains a frame with zero keypoint confidence";
        }
        if (!reason.empty()) {
            matrix.invalidate(i);
            if (diagnostics != nullptr) diagnostics->push_back({i, reason});
        }
    }

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));

    // Each cell is written by exactly one worker; rows are handed out dynamically.
    std::atomic<std::size_t> next_row{0};
    auto worker = [&] {
        for (std::size_t i = next_row++; i < n; i = next_row++) {
            if (!matrix.valid(i)) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!matrix.valid(j)) continue;
                matrix.set(i, j, dtw_distance(segments[i], segments[j]));
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return matrix;
}

Clustering cluster(const DistanceMatrix& matrix, const ClusterCut& cut) {
    const std::vector<std::size_t> rows = matrix.valid_indices();
    const std::size_t n = rows.size();

    std::size_t target = 1;
    std::optional<double> threshold;
    if (const auto* c = std::get_if<ClusterCount>(&cut)) {
        if (c->clusters < 1) throw ConfigError("cluster count must be at least 1");
        if (c->clusters > n) {
            throw ConfigError("cluster count " + std::to_string(c->clusters) + " exceeds " + std::to_string(n) +
                              " clusterable segments");
        }
        target = c->clusters;
    } else {
        const double t = std::get<ClusterThreshold>(cut).distance;
        if (!(t >= 0.0)) throw ConfigError("cluster distance threshold must be non-negative");
        threshold = t;
    }

    Clustering result;
    result.labels.assign(matrix.size(), -1);
    if (n == 0) return result;

    // Active clusters are kept ordered by their smallest member so that a
    // strict-less scan breaks ties toward the smallest index pair.
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {i};
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) dist[i][j] = matrix.at(rows[i], rows[j]);
    }
    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = i;

    while (active.size() > 1) {
        if (!threshold && active.size() <= target) break;
        std::size_t best_a = 0;
        std::size_t best_b = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < active.size(); ++a) {
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                const double d = dist[active[a]][active[b]];
                if (d < best) {
                    best = d;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (threshold && best > *threshold) break;

        const std::size_t keep = active[best_a];
        const std::size_t drop = active[best_b];
        const double na = static_cast<double>(members[keep].size());
        const double nb = static_cast<double>(members[drop].size());
        for (std::size_t other : active) {
            if (other == keep || other == drop) continue;
            const double d = (na * dist[keep][other] + nb * dist[drop][other]) / (na + nb);
            dist[keep][other] = d;
            dist[other][keep] = d;
        }
        members[keep].insert(members[keep].end(), members[drop].begin(), members[drop].end());
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    }

    int label = 0;
    for (std::size_t c : active) {
        for (std::size_t m : members[c]) result.labels[rows[m]] = label;
        ++label;
    }
    result.cluster_count = active.size();
    return result;
}

}  // namespace gesturescope
