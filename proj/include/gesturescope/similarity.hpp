#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gesturescope/gesture.hpp"

namespace gesturescope {

using SkeletonSequence = std::vector<NormalizedSkeleton>;

/// Confidence-weighted mean keypoint displacement, weighted by F only.
/// Throws DegenerateFrameError when F carries no confidence at all.
double frame_distance(const NormalizedSkeleton& f, const NormalizedSkeleton& g);

/// Mean of whichever directed distances are defined.
double frame_distance_sym(const NormalizedSkeleton& f, const NormalizedSkeleton& g);

/// DTW with steps (1,0),(0,1),(1,1) and symmetric frame cost. Returns the
/// cheapest path's total cost divided by its length; among equal-cost paths
/// the shortest one is taken.
double dtw_distance(const SkeletonSequence& a, const SkeletonSequence& b);

/// Symmetric n x n matrix. Rows of segments that could not be compared are
/// flagged invalid and hold no meaningful values.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), values_(n * n, 0.0), valid_(n, true) {}

    std::size_t size() const { return n_; }
    double at(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        values_[i * n_ + j] = v;
        values_[j * n_ + i] = v;
    }
    bool valid(std::size_t i) const { return valid_[i]; }
    void invalidate(std::size_t i) { valid_[i] = false; }
    std::vector<std::size_t> valid_indices() const;

    std::string to_csv(const std::vector<std::string>& ids) const;

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
    std::vector<bool> valid_;
};

struct MatrixDiagnostic {
    std::size_t index = 0;
    std::string reason;
};

/// Pairwise DTW over all sequences; computed in parallel over rows.
DistanceMatrix distance_matrix(const std::vector<SkeletonSequence>& segments,
                               std::vector<MatrixDiagnostic>* diagnostics = nullptr,
                               unsigned threads = 0);

struct ClusterCount {
    std::size_t clusters = 1;
};
struct ClusterThreshold {
    double distance = 0.0;
};
using ClusterCut = std::variant<ClusterCount, ClusterThreshold>;

/// labels[i] is the cluster id of row i, or -1 for rows excluded as invalid.
struct Clustering {
    std::vector<int> labels;
    std::size_t cluster_count = 0;
};

/// Average-linkage agglomerative clustering on the valid rows of the matrix.
Clustering cluster(const DistanceMatrix& matrix, const ClusterCut& cut);

}  // namespace gesturescope
