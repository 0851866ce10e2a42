#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include <json.hpp>

#include "gesturescope/gesture.hpp"
#include "gesturescope/similarity.hpp"

namespace gesturescope {

/// Everything tunable about an analysis run and the views derived from it.
struct AnalysisConfig {
    double variation_threshold = 0.4;
    double change_threshold = 0.5;
    GestureSpaceConfig space;
    std::uint64_t tsne_seed = 42;
    double tsne_perplexity = 10.0;
    int tsne_iterations = 1000;
    TypingParams typing;
    VariationReducer variation_reducer = VariationReducer::Mean;
    std::size_t glyph_samples = 24;
    ClusterCut cluster_cut = ClusterCount{3};
    std::optional<double> fps;

    void validate() const;
};

nlohmann::json config_to_json(const AnalysisConfig& config);
/// Missing keys keep their defaults; present keys are type- and range-checked.
AnalysisConfig config_from_json(const nlohmann::json& j);
AnalysisConfig parse_config(std::string_view source);

}  // namespace gesturescope
