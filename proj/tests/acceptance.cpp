// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include "gesturescope/analysis.hpp"
#include "gesturescope/cli.hpp"
#include "gesturescope/store.hpp"
#include "gesturescope/viewmodel.hpp"
#include "support.hpp"

using namespace gesturescope;
using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    if (!ok) ++failures;
}

template <typename Fn>
void criterion(const std::string& name, Fn&& fn) {
    try {
        std::string detail;
        const bool ok = fn(detail);
        report(name, ok, detail);
    } catch (const std::exception& e) {
        report(name, false, std::string("threw: ") + e.what());
    }
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt_double(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

// Runs the CLI analyze command and returns the published bundle path.
fs::path cli_analyze(const fs::path& inputs, const fs::path& video_dir, bool with_embeddings = true) {
    std::vector<std::string> args{"analyze",      "--pose", (inputs / "pose.json").string(),
                                  "--transcript", (inputs / "transcript.json").string(),
                                  "--out",        video_dir.string()};
    if (with_embeddings) {
        args.push_back("--embeddings");
        args.push_back((inputs / "embeddings.txt").string());
    }
    std::ostringstream out, err;
    if (run_cli(args, out, err) != 0) throw std::runtime_error("analyze failed: " + err.str());
    std::string path = out.str();
    while (!path.empty() && std::isspace(static_cast<unsigned char>(path.back()))) path.pop_back();
    return path;
}

fs::path cli_synth(const fs::path& dir, double seconds, std::uint64_t seed, bool audience) {
    std::vector<std::string> args{"synth",  "--seconds", std::to_string(seconds), "--seed", std::to_string(seed),
                                  "--out", dir.string()};
    if (audience) args.push_back("--audience");
    std::ostringstream out, err;
    if (run_cli(args, out, err) != 0) throw std::runtime_error("synth failed: " + err.str());
    return dir;
}

// Phrase/segment word-range overlap computed from the bundle JSON alone.
bool links_match_brute_force(const json& bundle, std::string& why) {
    std::set<std::pair<std::size_t, std::size_t>> brute;
    for (const auto& p : bundle.at("phrases")) {
        const std::size_t pb = p.at("words")[0];
        const std::size_t pe = p.at("words")[1];
        for (const auto& s : bundle.at("segments")) {
            if (s.at("degenerate").get<bool>()) continue;
            const std::size_t sb = s.at("words")[0];
            const std::size_t se = s.at("words")[1];
            if (pb < se && sb < pe) brute.insert({p.at("id").get<std::size_t>(), s.at("id").get<std::size_t>()});
        }
    }
    std::set<std::pair<std::size_t, std::size_t>> got;
    std::size_t listed = 0;
    for (const auto& l : bundle.at("relation").at("links")) {
        got.insert({l[0].get<std::size_t>(), l[1].get<std::size_t>()});
        ++listed;
    }
    why = std::to_string(listed) + " links vs " + std::to_string(brute.size()) + " expected";
    return got == brute && listed == brute.size();
}

}  // namespace

int main() {
    using testsupport::oracle_dtw;
    using testsupport::oracle_frame_distance;
    using testsupport::random_skeleton;
    using testsupport::uniform_skeleton;

    criterion("default thresholds are 0.4 and 0.5", [](std::string& d) {
        const AnalysisConfig c;
        const AnalysisConfig parsed = parse_config("{}");
        d = "variation " + fmt_double(c.variation_threshold) + ", change " + fmt_double(c.change_threshold);
        return c.variation_threshold == 0.4 && c.change_threshold == 0.5 && parsed.variation_threshold == 0.4 &&
               parsed.change_threshold == 0.5;
    });

    criterion("frame distance matches the formula", [](std::string& d) {
        std::mt19937_64 rng(2024);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const auto f = random_skeleton(rng);
            const auto g = random_skeleton(rng);
            worst = std::max(worst, std::abs(frame_distance(f, g) - oracle_frame_distance(f, g)));
        }
        const double shifted = frame_distance(uniform_skeleton(0.1, -0.2), uniform_skeleton(0.4, 0.2));
        d = "max error " + fmt_double(worst) + " over 1000 pairs, (0.3,0.4) shift gives " + fmt_double(shifted);
        return worst <= 1e-12 && std::abs(shifted - 0.5) <= 1e-12;
    });

    criterion("dtw equals exhaustive path search", [](std::string& d) {
        const auto t0 = Clock::now();
        std::mt19937_64 rng(4242);
        std::uniform_int_distribution<std::size_t> len(1, 6);
        int pairs = 0;
        int mismatches = 0;
        for (; pairs < 600; ++pairs) {
            SkeletonSequence a;
            SkeletonSequence b;
            for (std::size_t i = len(rng); i > 0; --i) a.push_back(random_skeleton(rng));
            for (std::size_t i = len(rng); i > 0; --i) b.push_back(random_skeleton(rng));
            std::vector<std::vector<double>> cost(a.size(), std::vector<double>(b.size()));
            for (std::size_t i = 0; i < a.size(); ++i) {
                for (std::size_t j = 0; j < b.size(); ++j) cost[i][j] = frame_distance_sym(a[i], b[j]);
            }
            if (dtw_distance(a, b) != oracle_dtw(cost)) ++mismatches;
        }
        const double secs = seconds_since(t0);
        d = std::to_string(pairs) + " pairs, " + std::to_string(mismatches) + " mismatches, " + fmt_double(secs) + " s";
        return pairs >= 500 && mismatches == 0 && secs < 60.0;
    });

    criterion("normalization is translation and scale invariant", [](std::string& d) {
        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> shift(-300.0, 300.0);
        std::uniform_real_distribution<double> scale(0.25, 4.0);
        double worst = 0.0;
        for (int trial = 0; trial < 500; ++trial) {
            PoseFrame f = testsupport::random_pose_frame(rng);
            const double h = 2000.0;
            const auto base = normalize_skeleton(f, h);
            PoseFrame moved = f;
            const double dx = shift(rng);
            const double dy = shift(rng);
            const double lambda = scale(rng);
            for (auto& k : moved.keypoints) {
                k.x = (k.x + dx) * lambda;
                k.y = (k.y + dy) * lambda;
            }
            const auto m = normalize_skeleton(moved, h * lambda);
            for (std::size_t k = 0; k < kUpperBodyKeypoints; ++k) {
                worst = std::max({worst, std::abs(m.keypoints[k].x - base.keypoints[k].x),
                                  std::abs(m.keypoints[k].y - base.keypoints[k].y)});
            }
        }
        d = "max deviation " + fmt_double(worst) + " over 500 frames";
        return worst < 1e-9;
    });

    criterion("scores are min-max normalized", [](std::string& d) {
        const auto a = normalize_scores({2, 4, 6});
        const auto b = normalize_scores({5, 5, 5});
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(0.0, 50.0);
        bool ok = a == std::vector<double>{0, 0.5, 1} && b == std::vector<double>{0, 0, 0};
        for (int trial = 0; trial < 500 && ok; ++trial) {
            std::vector<double> raw(30);
            for (auto& v : raw) v = u(rng);
            const auto out = normalize_scores(raw);
            const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
            ok = out[static_cast<std::size_t>(lo - raw.begin())] == 0.0 &&
                 out[static_cast<std::size_t>(hi - raw.begin())] == 1.0;
            for (std::size_t i = 0; i < raw.size() && ok; ++i) {
                const double expect = (raw[i] - *lo) / (*hi - *lo);
                ok = out[i] >= 0.0 && out[i] <= 1.0 && std::abs(out[i] - expect) <= 1e-12;
            }
        }
        d = "[2,4,6] -> [0,0.5,1], constant -> zeros, 500 random vectors";
        return ok;
    });

    criterion("heatmap counts every detected wrist once", [](std::string& d) {
        std::mt19937_64 rng(100);
        std::uniform_int_distribution<int> frames(1, 400);
        std::uniform_int_distribution<int> res(1, 96);
        int bad = 0;
        for (int fixture = 0; fixture < 100; ++fixture) {
            std::vector<NormalizedSkeleton> skels;
            std::uint64_t detected = 0;
            for (int i = frames(rng); i > 0; --i) {
                auto s = random_skeleton(rng);
                if (i % 17 == 0) s.keypoints[4].x = 1.0;
                if (i % 19 == 0) s.keypoints[7].y = -1.0;
                detected += s.keypoints[4].detected() + s.keypoints[7].detected();
                skels.push_back(s);
            }
            GestureSpaceConfig cfg;
            cfg.grid_resolution = res(rng);
            const auto grid = build_heatmap(skels, cfg);
            std::uint64_t sum = 0;
            for (auto c : grid.cells) sum += c;
            if (sum != detected || grid.total_samples != detected) ++bad;
        }
        d = std::to_string(100 - bad) + "/100 fixtures conserve mass";
        return bad == 0;
    });

    criterion("two gesture families form two clusters", [](std::string& d) {
        std::mt19937_64 rng(99);
        std::uniform_int_distribution<std::size_t> len(8, 20);
        std::normal_distribution<double> noise(0.0, 0.01);
        auto ramp = [&](double y0, double y1, double spread0, double spread1) {
            SkeletonSequence out;
            const std::size_t n = len(rng);
            for (std::size_t i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) / static_cast<double>(n - 1);
                const double y = y0 + t * (y1 - y0);
                const double x = spread0 + t * (spread1 - spread0);
                auto s = testsupport::arms_pose(-x, y, x, y);
                for (auto& k : s.keypoints) {
                    k.x += noise(rng);
                    k.y += noise(rng);
                }
                out.push_back(s);
            }
            return out;
        };
        std::vector<SkeletonSequence> segs;
        for (int i = 0; i < 5; ++i) {
            segs.push_back(ramp(-0.4, 0.3, 0.1, 0.1));   // hands rising
            segs.push_back(ramp(-0.2, -0.2, 0.1, 0.7));  // hands spreading
        }
        const auto c = cluster(distance_matrix(segs), ClusterCount{2});
        bool ok = c.cluster_count == 2 && c.labels[0] != c.labels[1];
        for (std::size_t i = 0; i < segs.size(); ++i) ok = ok && c.labels[i] == c.labels[i % 2];
        d = "10 segments, cut at 2, families " + std::string(ok ? "separated" : "mixed");
        return ok;
    });

    criterion("gesture typing worked examples", [](std::string& d) {
        const TypingParams p;
        const auto closed = classify_gesture_type({testsupport::arms_pose(-0.05, -0.2, 0.05, -0.2)}, p);
        const auto open = classify_gesture_type({testsupport::arms_pose(-0.6, 0.1, 0.6, 0.1)}, p);
        const auto other = classify_gesture_type({testsupport::arms_pose(-0.2, -0.2, 0.1, -0.2)}, p);
        d = std::string(to_string(closed)) + ", " + std::string(to_string(open)) + ", " + std::string(to_string(other));
        return p.alpha == 0.8 && p.beta == 1.6 && closed == GestureType::Closed && open == GestureType::Open &&
               other == GestureType::Others;
    });

    const fs::path scratch = testsupport::scratch_dir("acceptance");
    std::vector<fs::path> bundles;

    criterion("analysis is byte-for-byte deterministic", [&](std::string& d) {
        const auto first = cli_analyze(testsupport::fixture_dir(), scratch / "run1" / "speaker30");
        const auto second = cli_analyze(testsupport::fixture_dir(), scratch / "run2" / "speaker30");
        bundles.push_back(first);
        const bool same = read_file(first) == read_file(second) && first.filename() == second.filename();
        d = "two runs on the 30 s fixture " + std::string(same ? "identical" : "differ");
        return same;
    });

    criterion("10 minute video analyzes within 5 minutes", [&](std::string& d) {
        const fs::path in = cli_synth(scratch / "long-input", 600.0, 11, false);
        const auto t0 = Clock::now();
        const auto bundle = cli_analyze(in, scratch / "long");
        const double secs = seconds_since(t0);
        bundles.push_back(bundle);
        const json b = json::parse(read_file(bundle));
        const std::size_t frames = b.at("video").at("frame_count");
        d = std::to_string(frames) + " frames, " + std::to_string(b.at("segments").size()) + " segments in " +
            fmt_double(secs) + " s";
        return frames == 15000 && secs < 300.0;
    });

    criterion("relation links equal brute-force overlap", [&](std::string& d) {
        for (std::uint64_t seed : {1, 2, 3}) {
            const bool audience = seed == 2;
            const fs::path in = cli_synth(scratch / ("in-" + std::to_string(seed)), 40.0, seed, audience);
            bundles.push_back(cli_analyze(in, scratch / ("v-" + std::to_string(seed)), seed != 3));
        }
        std::size_t total = 0;
        for (const auto& path : bundles) {
            std::string why;
            if (!links_match_brute_force(json::parse(read_file(path)), why)) {
                d = path.parent_path().parent_path().filename().string() + ": " + why;
                return false;
            }
            total += json::parse(read_file(path)).at("relation").at("links").size();
        }
        d = std::to_string(bundles.size()) + " fixtures, " + std::to_string(total) + " links checked";
        return bundles.size() >= 5;
    });

    std::error_code ec;
    fs::remove_all(scratch, ec);
    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
    return failures == 0 ? 0 : 1;
}
