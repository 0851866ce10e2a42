#include "gesturescope/viewmodel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gesturescope/errors.hpp"

namespace gesturescope {

std::pair<int, int> heatmap_cell(double x, double y, int resolution) {
    auto bin = [resolution](double v) {
        const int b = static_cast<int>(std::floor((v + 1.0) / 2.0 * resolution));
        return std::clamp(b, 0, resolution - 1);
    };
    return {bin(-y), bin(x)};
}

std::string HeatmapGrid::to_pgm() const {
    std::uint64_t peak = 0;
    for (auto c : cells) peak = std::max(peak, c);
    std::ostringstream out;
    out << "P2\n" << resolution << ' ' << resolution << "\n255\n";
    for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) {
            const std::uint64_t v = peak == 0 ? 0 : (at(r, c) * 255 + peak / 2) / peak;
            out << v << (c + 1 == resolution ? '\n' : ' ');
        }
    }
    return out.str();
}

HeatmapGrid build_heatmap(const std::vector<NormalizedSkeleton>& skeletons, const GestureSpaceConfig& config) {
    if (config.grid_resolution <= 0) throw ConfigError("grid_resolution must be positive");
    HeatmapGrid grid;
    grid.resolution = config.grid_resolution;
    grid.cells.assign(static_cast<std::size_t>(grid.resolution) * grid.resolution, 0);
    for (const auto& s : skeletons) {
        for (std::size_t k : {body25::RWrist, body25::LWrist}) {
            const auto& p = s.keypoints[k];
            if (!p.detected()) continue;
            const auto [row, col] = heatmap_cell(p.x, p.y, grid.resolution);
            ++grid.cells[static_cast<std::size_t>(row) * grid.resolution + col];
            ++grid.total_samples;
        }
    }
    return grid;
}

std::pair<TimelineSeries, TimelineSeries> build_timelines(const std::vector<FrameSkeleton>& frames) {
    TimelineSeries vertical{TimelineAxis::VerticalPosition, {}};
    TimelineSeries horizontal{TimelineAxis::HorizontalPosition, {}};
    vertical.samples.reserve(frames.size());
    horizontal.samples.reserve(frames.size());
    for (const auto& f : frames) {
        TimelineSample v{f.timestamp, std::nullopt, std::nullopt};
        TimelineSample h = v;
        if (f.skeleton) {
            const auto& r = f.skeleton->keypoints[body25::RWrist];
            const auto& l = f.skeleton->keypoints[body25::LWrist];
            if (r.detected()) {
                v.right_hand = r.y;
                h.right_hand = r.x;
            }
            if (l.detected()) {
                v.left_hand = l.y;
                h.left_hand = l.x;
            }
        }
        vertical.samples.push_back(v);
        horizontal.samples.push_back(h);
    }
    return {std::move(vertical), std::move(horizontal)};
}

std::vector<TranscriptAnnotation> annotate_transcript(const std::vector<WordMetrics>& metrics, double change_threshold,
                                                      double variation_threshold) {
    for (double t : {change_threshold, variation_threshold}) {
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("thresholds must lie in [0,1]");
    }
    std::vector<TranscriptAnnotation> out;
    out.reserve(metrics.size());
    for (const auto& m : metrics) {
        out.push_back({m.word_index, m.average, m.spatial_variation, m.temporal_change,
                       m.spatial_variation > variation_threshold, m.temporal_change > change_threshold});
    }
    return out;
}

namespace {

void check_projection_input(std::size_t n, const ProjectionParams& params) {
    if (n < 3) throw TooFewItemsError("projection needs at least 3 items, got " + std::to_string(n));
    if (!(params.perplexity > 0.0)) throw ConfigError("perplexity must be positive");
    if (!(params.perplexity < static_cast<double>(n))) {
        throw ConfigError("perplexity must be smaller than the item count");
    }
    if (params.iterations < 0) throw ConfigError("iterations must be non-negative");
}

std::vector<Point2> fit_unit_square(std::vector<Point2> pts) {
    double mx = 0.0;
    double my = 0.0;
    for (const auto& p : pts) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double extent = 0.0;
    for (auto& p : pts) {
        p.x -= mx;
        p.y -= my;
        extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
    }
    if (extent > 0.0) {
        for (auto& p : pts) {
            p.x = std::clamp(p.x / extent, -1.0, 1.0);
            p.y = std::clamp(p.y / extent, -1.0, 1.0);
        }
    }
    return pts;
}

TsneParams tsne_params(const ProjectionParams& p) {
    TsneParams t;
    t.perplexity = p.perplexity;
    t.iterations = p.iterations;
    t.seed = p.seed;
    return t;
}

}  // namespace

std::vector<Point2> project_2d(const std::vector<std::vector<double>>& vectors, const ProjectionParams& params) {
    const std::size_t n = vectors.size();
    check_projection_input(n, params);
    std::vector<double> d2(n * n, 0.0);
    std::vector<std::uint64_t> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        keys[i] = fnv1a(vectors[i].data(), vectors[i].size() * sizeof(double));
        for (std::size_t j = i + 1; j < n; ++j) {
            if (vectors[i].size() != vectors[j].size()) throw ConfigError("projection vectors differ in dimension");
            double s = 0.0;
            for (std::size_t d = 0; d < vectors[i].size(); ++d) {
                const double diff = vectors[i][d] - vectors[j][d];
                s += diff * diff;
            }
            d2[i * n + j] = s;
            d2[j * n + i] = s;
        }
    }
    return fit_unit_square(tsne_embed(d2, n, keys, tsne_params(params)));
}

std::vector<Point2> project_2d(const DistanceMatrix& matrix, const std::vector<std::size_t>& rows,
                               const ProjectionParams& params) {
    const std::size_t n = rows.size();
    check_projection_input(n, params);
    std::vector<double> d2(n * n, 0.0);
    std::vector<std::uint64_t> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double d = matrix.at(rows[i], rows[j]);
            d2[i * n + j] = d * d;
            row[j] = d;
        }
        std::sort(row.begin(), row.end());
        keys[i] = fnv1a(row.data(), row.size() * sizeof(double));
    }
    return fit_unit_square(tsne_embed(d2, n, keys, tsne_params(params)));
}

std::vector<double> resample_linear(const std::vector<double>& values, std::size_t samples) {
    std::vector<double> out(samples, 0.0);
    if (values.empty() || samples == 0) return out;
    if (values.size() == samples) return values;
    if (values.size() == 1 || samples == 1) {
        std::fill(out.begin(), out.end(), values.front());
        return out;
    }
    const double scale = static_cast<double>(values.size() - 1) / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) {
        const double pos = static_cast<double>(i) * scale;
        const std::size_t lo = std::min(static_cast<std::size_t>(pos), values.size() - 1);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        out[i] = values[lo] + frac * (values[hi] - values[lo]);
    }
    out.back() = values.back();
    return out;
}

GlyphModel build_glyph(const GestureSegment& segment, std::size_t samples) {
    if (segment.degenerate() || segment.variation_profile.empty()) {
        throw GlyphError("segment " + std::to_string(segment.id) + " has no skeletons");
    }
    if (samples == 0) throw ConfigError("glyph sample count must be positive");
    return GlyphModel{segment.id, segment.average, segment.gesture_type,
                      resample_linear(segment.variation_profile, samples)};
}

RelationGraph build_relation_graph(const std::vector<PhraseSpan>& phrases, const std::vector<GestureSegment>& segments,
                                   const std::vector<std::optional<Point2>>& phrase_points,
                                   const std::vector<std::optional<Point2>>& gesture_points,
                                   const std::vector<bool>& phrase_included, std::size_t glyph_samples) {
    RelationGraph g;
    for (std::size_t p = 0; p < phrases.size(); ++p) {
        g.phrase_nodes.push_back({phrases[p].id, p < phrase_points.size() ? phrase_points[p] : std::nullopt});
    }
    for (std::size_t s = 0; s < segments.size(); ++s) {
        GestureNode node{segments[s].id, s < gesture_points.size() ? gesture_points[s] : std::nullopt, std::nullopt};
        if (!segments[s].degenerate()) node.glyph = build_glyph(segments[s], glyph_samples);
        g.gesture_nodes.push_back(std::move(node));
    }
    for (std::size_t p = 0; p < phrases.size(); ++p) {
        if (p < phrase_included.size() && !phrase_included[p]) continue;
        for (const auto& seg : segments) {
            if (seg.degenerate()) continue;
            if (phrases[p].word_begin < seg.word_end && seg.word_begin < phrases[p].word_end) {
                g.links.push_back({phrases[p].id, seg.id});
            }
        }
    }
    return g;
}

Trajectory build_trajectory(const std::vector<FrameSkeleton>& frames) {
    Trajectory t;
    auto push = [](std::vector<TrajectoryItem>& out, const FrameSkeleton& f, std::size_t k) {
        if (f.skeleton && f.skeleton->keypoints[k].detected()) {
            const auto& p = f.skeleton->keypoints[k];
            out.emplace_back(TrajectoryPoint{f.timestamp, p.x, p.y});
        } else if (out.empty() || !std::holds_alternative<TrajectoryGap>(out.back())) {
            out.emplace_back(TrajectoryGap{});
        }
    };
    for (const auto& f : frames) {
        push(t.right_hand, f, body25::RWrist);
        push(t.left_hand, f, body25::LWrist);
    }
    return t;
}

std::vector<std::size_t> search_keyword(const std::vector<TranscriptWord>& words, std::string_view query) {
    std::vector<std::size_t> hits;
    const std::string q = normalize_token(query);
    if (q.empty()) return hits;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (normalize_token(words[i].text) == q) hits.push_back(i);
    }
    return hits;
}

}  // namespace gesturescope
