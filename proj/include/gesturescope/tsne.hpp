#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gesturescope {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

struct TsneParams {
    double perplexity = 10.0;
    int iterations = 1000;
    std::uint64_t seed = 42;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iterations = 250;
};

/// Exact t-SNE over a dense matrix of squared dissimilarities (row-major, n x n).
/// item_keys seed each item's starting position so that the layout follows
/// the items rather than their order; pass one key per item.
std::vector<Point2> tsne_embed(const std::vector<double>& squared_distances, std::size_t n,
                               const std::vector<std::uint64_t>& item_keys, const TsneParams& params);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace gesturescope
