#include "gesturescope/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "gesturescope/analysis.hpp"
#include "gesturescope/errors.hpp"
#include "gesturescope/service.hpp"
#include "gesturescope/store.hpp"
#include "gesturescope/synthetic.hpp"

namespace gesturescope {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDataRootEnv = "GESTURESCOPE_DATA_ROOT";

struct AnalyzeOptions {
    std::string pose;
    std::string transcript;
    std::string phrases;
    std::string embeddings;
    std::string config;
    std::string out;
    std::string video_id;
    std::string title;
    std::optional<std::uint64_t> seed;
    std::optional<double> fps;
    bool fallback_tagger = false;
};

void report(std::ostream& err, const std::string& kind, const std::string& message) {
    err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

// Raw bytes of the pose input; per-frame directories hash in file-name order.
std::string pose_bytes(const fs::path& p) {
    if (!fs::is_directory(p)) return read_file(p);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string all;
    for (const auto& f : files) {
        all += f.filename().string();
        all += '\0';
        all += read_file(f);
    }
    return all;
}

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
    if (o.pose.empty()) throw ConfigError("--pose is required");
    if (o.transcript.empty()) throw ConfigError("--transcript is required");
    if (o.out.empty()) throw ConfigError("--out is required");
    if (!fs::exists(o.pose)) throw ConfigError("pose input " + o.pose + " does not exist");
    if (!fs::exists(o.transcript)) throw ConfigError("transcript " + o.transcript + " does not exist");

    AnalysisConfig config = o.config.empty() ? AnalysisConfig{} : parse_config(read_file(o.config));
    if (o.seed) config.tsne_seed = *o.seed;
    if (o.fps) config.fps = *o.fps;
    config.validate();

    AnalysisInputs in;
    const fs::path out_dir(o.out);
    in.video_id = o.video_id.empty() ? fs::absolute(out_dir).lexically_normal().filename().string() : o.video_id;
    in.title = o.title;
    in.fallback_tagger = o.fallback_tagger;

    std::string fingerprint = pose_bytes(o.pose);
    in.pose = load_pose(o.pose, config.fps);
    const std::string transcript = read_file(o.transcript);
    fingerprint += '\0' + transcript;
    in.words = parse_transcript(transcript);
    if (!o.phrases.empty()) {
        const std::string text = read_file(o.phrases);
        fingerprint += '\0' + text;
        in.annotations = parse_phrase_annotations(text);
    }
    if (!o.embeddings.empty()) {
        const std::string text = read_file(o.embeddings);
        fingerprint += '\0' + text;
        in.embeddings = load_embeddings(text);
    }
    fingerprint += '\0' + config_to_json(config).dump() + '\0' + in.video_id + '\0' + in.title + '\0' +
                   (in.fallback_tagger ? "1" : "0");

    const AnalysisBundle bundle = analyze(in, config);
    const std::string body = dump_bundle(bundle_to_json(bundle));
    const std::string hash = sha256_hex(fingerprint);
    const fs::path path = publish_bundle(out_dir, body, hash);
    std::error_code ec;
    fs::remove(out_dir / "failed.json", ec);

    const auto& d = bundle.diagnostics;
    err << json{{"clamp_events", d.clamp_events},
                {"frames_without_speaker", d.frames_without_speaker},
                {"degenerate_segments", d.degenerate_segments.size()},
                {"untyped_segments", d.untyped_segments.size()},
                {"unembedded_phrases", d.unembedded_phrases.size()},
                {"segments", bundle.segments.size()},
                {"phrases", bundle.phrases.size()},
                {"notes", d.notes}}
               .dump()
        << '\n';
    out << path.string() << '\n';
    return 0;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::string data_root(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kDataRootEnv)) return env;
    throw ConfigError(std::string("no data root: pass --root or set ") + kDataRootEnv);
}

int cmd_export(const std::string& root, const std::string& video, const std::string& what, const std::string& dest,
               std::ostream& out) {
    if (what != "matrix" && what != "heatmap" && what != "transcript-csv") {
        throw std::invalid_argument("unknown export kind \"" + what + "\" (expected matrix, heatmap or transcript-csv)");
    }
    VideoStore store(data_root(root));
    const ServedBundle served = store.get_bundle(video);
    const json b = json::parse(served.body);

    std::string text;
    if (what == "matrix") {
        const json& segs = b.at("segments");
        const json& m = b.at("distance_matrix");
        DistanceMatrix matrix(segs.size());
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            ids.push_back("seg-" + std::to_string(segs[i].at("id").get<std::size_t>()));
            if (segs[i].at("degenerate").get<bool>()) matrix.invalidate(i);
        }
        for (std::size_t i = 0; i < segs.size(); ++i) {
            for (std::size_t j = i + 1; j < segs.size(); ++j) {
                if (!m[i][j].is_null()) matrix.set(i, j, m[i][j].get<double>());
            }
        }
        text = matrix.to_csv(ids);
    } else if (what == "heatmap") {
        HeatmapGrid grid;
        grid.resolution = b.at("heatmap").at("resolution");
        grid.cells = b.at("heatmap").at("cells").get<std::vector<std::uint64_t>>();
        grid.total_samples = b.at("heatmap").at("total_samples");
        text = grid.to_pgm();
    } else {
        std::ostringstream csv;
        csv.precision(17);
        csv << "index,word,start,end,spatial_variation,temporal_change,high_variation,large_change\n";
        for (const auto& w : b.at("words")) {
            csv << w.at("index").get<std::size_t>() << ',' << csv_field(w.at("text")) << ','
                << w.at("start").get<double>() << ',' << w.at("end").get<double>() << ','
                << w.at("spatial_variation").get<double>() << ',' << w.at("temporal_change").get<double>() << ','
                << (w.at("high_variation").get<bool>() ? 1 : 0) << ',' << (w.at("large_change").get<bool>() ? 1 : 0)
                << '\n';
        }
        text = csv.str();
    }
    if (dest.empty() || dest == "-") {
        out << text;
    } else {
        write_file_atomic(dest, text);
    }
    return 0;
}

ApiServer* g_server = nullptr;

extern "C" void handle_stop(int) {
    if (g_server != nullptr) g_server->stop();
}

int cmd_serve(const std::string& root_flag, const std::string& bind, const std::string& ui, std::ostream& err) {
    const fs::path root = data_root(root_flag);
    if (!fs::is_directory(root)) throw StorageError("data root " + root.string() + " does not exist");
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw ConfigError("--bind must be host:port");
    const std::string host = bind.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(bind.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("--bind port is not a number");
    }

    VideoStore store(root);
    std::optional<fs::path> static_dir;
    if (!ui.empty()) static_dir = ui;
    ApiServer server(store, static_dir);
    const int bound = server.bind(host, port);
    spdlog::info("serving {} on {}:{}", root.string(), host, bound);
    err << "listening on " << host << ':' << bound << std::endl;
    g_server = &server;
    std::signal(SIGINT, handle_stop);
    std::signal(SIGTERM, handle_stop);
    server.serve();
    g_server = nullptr;
    return 0;
}

int cmd_synth(double seconds, double fps, std::uint64_t seed, bool audience, const std::string& out_dir,
              std::ostream& out) {
    if (out_dir.empty()) throw ConfigError("--out is required");
    synthetic::SpeakerOptions opt;
    opt.seconds = seconds;
    opt.fps = fps;
    opt.seed = seed;
    opt.audience = audience;
    const auto fx = synthetic::make_speaker(opt);
    const fs::path dir(out_dir);
    write_file_atomic(dir / "pose.json", fx.pose_json);
    write_file_atomic(dir / "transcript.json", fx.transcript_json);
    write_file_atomic(dir / "embeddings.txt", fx.embeddings_text);
    out << (dir / "pose.json").string() << '\n'
        << (dir / "transcript.json").string() << '\n'
        << (dir / "embeddings.txt").string() << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"gesturescope: gesture analytics for presentation videos"};
    app.require_subcommand(1);

    AnalyzeOptions a;
    auto* analyze = app.add_subcommand("analyze", "Run the analysis pipeline and publish a bundle");
    analyze->add_option("--pose", a.pose, "Pose keypoints: JSON file or directory of per-frame files");
    analyze->add_option("--transcript", a.transcript, "Word-timestamped transcript JSON");
    analyze->add_option("--phrases", a.phrases, "Optional phrase annotations JSON");
    analyze->add_option("--embeddings", a.embeddings, "Word vectors, one word per line");
    analyze->add_option("--config", a.config, "Config JSON");
    analyze->add_option("--out", a.out, "Video directory receiving bundles/ and current");
    analyze->add_option("--seed", a.seed, "t-SNE seed (overrides config)");
    analyze->add_option("--fps", a.fps, "Frame rate for pose files without timestamps");
    analyze->add_option("--video-id", a.video_id, "Video id (default: name of --out)");
    analyze->add_option("--title", a.title, "Display title");
    analyze->add_flag("--fallback-tagger", a.fallback_tagger, "Tag untagged transcripts with the closed-class tagger");

    std::string root;
    std::string bind = "127.0.0.1:8080";
    std::string ui;
    auto* serve = app.add_subcommand("serve", "Serve the HTTP API over a data root");
    serve->add_option("--root", root, std::string("Data root (default: $") + kDataRootEnv + ")");
    serve->add_option("--bind", bind, "host:port")->capture_default_str();
    serve->add_option("--ui", ui, "Directory of static UI files to mount at /");

    std::string video;
    std::string what;
    std::string dest;
    auto* exp = app.add_subcommand("export", "Export matrix CSV, heatmap PGM or transcript CSV");
    exp->add_option("--root", root, std::string("Data root (default: $") + kDataRootEnv + ")");
    exp->add_option("--video", video, "Video id")->required();
    exp->add_option("--what", what, "matrix | heatmap | transcript-csv")->required();
    exp->add_option("--out", dest, "Output file (default: stdout)");

    double seconds = 30.0;
    double fps = 25.0;
    std::uint64_t seed = 7;
    bool audience = false;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Write a synthetic speaker fixture");
    synth->add_option("--seconds", seconds)->capture_default_str();
    synth->add_option("--fps", fps)->capture_default_str();
    synth->add_option("--seed", seed)->capture_default_str();
    synth->add_flag("--audience", audience, "Add an off-center second person");
    synth->add_option("--out", synth_out, "Output directory");

    std::vector<const char*> argv{"gesturescope"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (*analyze) return cmd_analyze(a, out, err);
        if (*serve) return cmd_serve(root, bind, ui, err);
        if (*exp) return cmd_export(root, video, what, dest, out);
        if (*synth) return cmd_synth(seconds, fps, seed, audience, synth_out, out);
    } catch (const std::invalid_argument& e) {
        report(err, "UsageError", e.what());
        return 2;
    } catch (const Error& e) {
        report(err, e.kind(), e.what());
        if (*analyze && !a.out.empty()) {
            try {
                write_file_atomic(fs::path(a.out) / "failed.json", json{{"error", e.kind()}, {"message", e.what()}}.dump());
            } catch (const Error&) {
            }
        }
        return 1;
    } catch (const std::exception& e) {
        report(err, "Error", e.what());
        return 1;
    }
    return 2;
}

}  // namespace gesturescope
