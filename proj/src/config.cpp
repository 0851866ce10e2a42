#include "gesturescope/config.hpp"

#include <string>

#include "gesturescope/errors.hpp"

namespace gesturescope {

using nlohmann::json;

namespace {

json rect_to_json(const Rect& r) { return {{"x", {r.x_min, r.x_max}}, {"y", {r.y_min, r.y_max}}}; }

Rect rect_from_json(const json& j, const char* name) {
    auto pair = [&](const char* axis) {
        if (!j.is_object() || !j.contains(axis) || !j[axis].is_array() || j[axis].size() != 2 ||
            !j[axis][0].is_number() || !j[axis][1].is_number()) {
            throw ConfigError(std::string("regions.") + name + "." + axis + " must be [min, max]");
        }
        return std::pair{j[axis][0].get<double>(), j[axis][1].get<double>()};
    };
    const auto [x0, x1] = pair("x");
    const auto [y0, y1] = pair("y");
    return Rect{x0, x1, y0, y1};
}

double number(const json& j, const char* key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw ConfigError(std::string(key) + " must be a number");
    return it->get<double>();
}

long long integer(const json& j, const char* key, long long fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
    return it->get<long long>();
}

}  // namespace

void AnalysisConfig::validate() const {
    for (double t : {variation_threshold, change_threshold}) {
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("thresholds must lie in [0,1]");
    }
    space.validate();
    if (!(tsne_perplexity > 0.0)) throw ConfigError("tsne_perplexity must be positive");
    if (tsne_iterations < 0) throw ConfigError("tsne_iterations must be non-negative");
    if (!(typing.alpha > 0.0) || !(typing.beta > 0.0)) throw ConfigError("typing thresholds must be positive");
    if (glyph_samples == 0) throw ConfigError("glyph_samples must be positive");
    if (const auto* c = std::get_if<ClusterCount>(&cluster_cut); c && c->clusters < 1) {
        throw ConfigError("cluster_count must be at least 1");
    }
    if (const auto* t = std::get_if<ClusterThreshold>(&cluster_cut); t && !(t->distance >= 0.0)) {
        throw ConfigError("cluster_threshold must be non-negative");
    }
    if (fps && !(*fps > 0.0)) throw ConfigError("fps must be positive");
}

json config_to_json(const AnalysisConfig& c) {
    json j{{"variation_threshold", c.variation_threshold},
           {"change_threshold", c.change_threshold},
           {"grid_resolution", c.space.grid_resolution},
           {"tsne_seed", c.tsne_seed},
           {"tsne_perplexity", c.tsne_perplexity},
           {"tsne_iterations", c.tsne_iterations},
           {"typing_alpha", c.typing.alpha},
           {"typing_beta", c.typing.beta},
           {"variation_reducer", std::string(to_string(c.variation_reducer))},
           {"glyph_samples", c.glyph_samples},
           {"regions",
            {{"center_center", rect_to_json(c.space.center_center)},
             {"center", rect_to_json(c.space.center)},
             {"periphery", rect_to_json(c.space.periphery)}}}};
    if (const auto* count = std::get_if<ClusterCount>(&c.cluster_cut)) {
        j["cluster_count"] = count->clusters;
    } else {
        j["cluster_threshold"] = std::get<ClusterThreshold>(c.cluster_cut).distance;
    }
    if (c.fps) j["fps"] = *c.fps;
    return j;
}

AnalysisConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    AnalysisConfig c;
    c.variation_threshold = number(j, "variation_threshold", c.variation_threshold);
    c.change_threshold = number(j, "change_threshold", c.change_threshold);
    c.space.grid_resolution = static_cast<int>(integer(j, "grid_resolution", c.space.grid_resolution));
    const long long seed = integer(j, "tsne_seed", static_cast<long long>(c.tsne_seed));
    if (seed < 0) throw ConfigError("tsne_seed must be non-negative");
    c.tsne_seed = static_cast<std::uint64_t>(seed);
    c.tsne_perplexity = number(j, "tsne_perplexity", c.tsne_perplexity);
    c.tsne_iterations = static_cast<int>(integer(j, "tsne_iterations", c.tsne_iterations));
    c.typing.alpha = number(j, "typing_alpha", c.typing.alpha);
    c.typing.beta = number(j, "typing_beta", c.typing.beta);
    const long long samples = integer(j, "glyph_samples", static_cast<long long>(c.glyph_samples));
    if (samples <= 0) throw ConfigError("glyph_samples must be positive");
    c.glyph_samples = static_cast<std::size_t>(samples);
    if (auto it = j.find("variation_reducer"); it != j.end()) {
        if (!it->is_string()) throw ConfigError("variation_reducer must be a string");
        c.variation_reducer = variation_reducer_from_string(it->get<std::string>());
    }
    if (j.contains("cluster_count") && j.contains("cluster_threshold")) {
        throw ConfigError("give either cluster_count or cluster_threshold, not both");
    }
    if (j.contains("cluster_count")) {
        const long long k = integer(j, "cluster_count", 3);
        if (k < 1) throw ConfigError("cluster_count must be at least 1");
        c.cluster_cut = ClusterCount{static_cast<std::size_t>(k)};
    } else if (j.contains("cluster_threshold")) {
        c.cluster_cut = ClusterThreshold{number(j, "cluster_threshold", 0.0)};
    }
    if (j.contains("fps")) c.fps = number(j, "fps", 0.0);
    if (auto it = j.find("regions"); it != j.end()) {
        if (!it->is_object()) throw ConfigError("regions must be an object");
        if (it->contains("center_center")) c.space.center_center = rect_from_json((*it)["center_center"], "center_center");
        if (it->contains("center")) c.space.center = rect_from_json((*it)["center"], "center");
        if (it->contains("periphery")) c.space.periphery = rect_from_json((*it)["periphery"], "periphery");
    }
    c.validate();
    return c;
}

AnalysisConfig parse_config(std::string_view source) {
    json j;
    try {
        j = json::parse(source.begin(), source.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return config_from_json(j);
}

}  // namespace gesturescope
