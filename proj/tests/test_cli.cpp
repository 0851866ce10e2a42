#include <doctest.h>

#include <sstream>

#include "gesturescope/cli.hpp"
#include "gesturescope/errors.hpp"
#include "gesturescope/ingest.hpp"
#include "gesturescope/store.hpp"
#include "support.hpp"

using namespace gesturescope;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> analyze_args(const fs::path& video_dir) {
    const auto fx = testsupport::fixture_dir();
    return {"analyze",      "--pose", (fx / "pose.json").string(), "--transcript", (fx / "transcript.json").string(),
            "--embeddings", (fx / "embeddings.txt").string(),      "--out",        video_dir.string()};
}

std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

}  // namespace

TEST_CASE("cli: analyze publishes a bundle") {
    const fs::path root = testsupport::scratch_dir("cli-analyze");
    const fs::path video = root / "videos" / "talk";
    const Run r = cli(analyze_args(video));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const fs::path bundle = trim(r.out);
    CHECK(fs::exists(bundle));
    CHECK(bundle.parent_path().filename() == "bundles");
    CHECK(trim(read_file(video / "current")) == "bundles/" + bundle.filename().string());
    const json diag = json::parse(r.err);
    CHECK(diag["segments"].get<int>() > 0);
    CHECK(json::parse(read_file(bundle))["video"]["id"] == "talk");
}

TEST_CASE("cli: reruns are byte-identical") {
    const fs::path root = testsupport::scratch_dir("cli-rerun");
    const Run a = cli(analyze_args(root / "a"));
    const Run b = cli(analyze_args(root / "a"));
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out == b.out);
    CHECK(read_file(trim(a.out)) == read_file(trim(b.out)));

    auto seeded = analyze_args(root / "a");
    seeded.insert(seeded.end(), {"--seed", "7"});
    const Run c = cli(seeded);
    REQUIRE(c.code == 0);
    CHECK(c.out != a.out);
    CHECK(trim(read_file(root / "a" / "current")) == "bundles/" + fs::path(trim(c.out)).filename().string());
    CHECK(fs::exists(trim(a.out)));  // earlier bundles stay in place
}

TEST_CASE("cli: missing inputs") {
    const fs::path root = testsupport::scratch_dir("cli-missing");
    const auto fx = testsupport::fixture_dir();
    const Run r = cli({"analyze", "--pose", (fx / "pose.json").string(), "--out", (root / "v").string()});
    CHECK(r.code != 0);
    CHECK(json::parse(r.err)["error"] == "ConfigError");
    CHECK_FALSE(fs::exists(root / "v" / "current"));

    const Run gone = cli({"analyze", "--pose", (root / "nope.json").string(), "--transcript",
                          (fx / "transcript.json").string(), "--out", (root / "v").string()});
    CHECK(gone.code != 0);
    CHECK(json::parse(gone.err)["error"] == "ConfigError");
    CHECK(fs::exists(root / "v" / "failed.json"));
}

TEST_CASE("cli: bad config is rejected before analysis") {
    const fs::path root = testsupport::scratch_dir("cli-config");
    write_file_atomic(root / "config.json", R"({"change_threshold": -1})");
    auto args = analyze_args(root / "v");
    args.insert(args.end(), {"--config", (root / "config.json").string()});
    const Run r = cli(args);
    CHECK(r.code == 1);
    CHECK(json::parse(r.err)["error"] == "ConfigError");
}

TEST_CASE("cli: export") {
    const fs::path root = testsupport::scratch_dir("cli-export");
    REQUIRE(cli(analyze_args(root / "videos" / "talk")).code == 0);

    const Run matrix = cli({"export", "--root", root.string(), "--video", "talk", "--what", "matrix"});
    REQUIRE_MESSAGE(matrix.code == 0, matrix.err);
    std::istringstream lines(matrix.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header.rfind(",seg-0", 0) == 0);
    std::size_t rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    CHECK(rows == static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')));

    const Run pgm = cli({"export", "--root", root.string(), "--video", "talk", "--what", "heatmap", "--out",
                         (root / "heat.pgm").string()});
    REQUIRE(pgm.code == 0);
    CHECK(read_file(root / "heat.pgm").rfind("P2\n64 64\n", 0) == 0);

    const Run csv = cli({"export", "--root", root.string(), "--video", "talk", "--what", "transcript-csv"});
    REQUIRE(csv.code == 0);
    CHECK(csv.out.rfind("index,word,start,end,spatial_variation,temporal_change,high_variation,large_change\n", 0) == 0);
    CHECK(csv.out.find(",Germany,") != std::string::npos);

    const Run unknown = cli({"export", "--root", root.string(), "--video", "talk", "--what", "gif"});
    CHECK(unknown.code == 2);
    CHECK(json::parse(unknown.err)["error"] == "UsageError");

    const Run ghost = cli({"export", "--root", root.string(), "--video", "ghost", "--what", "matrix"});
    CHECK(ghost.code == 1);
    CHECK(json::parse(ghost.err)["error"] == "NotFound");
}

TEST_CASE("cli: synth writes a usable fixture") {
    const fs::path dir = testsupport::scratch_dir("cli-synth");
    const Run s = cli({"synth", "--seconds", "6", "--seed", "3", "--out", dir.string()});
    REQUIRE(s.code == 0);
    for (const char* f : {"pose.json", "transcript.json", "embeddings.txt"}) CHECK(fs::exists(dir / f));
    const Run a = cli({"analyze", "--pose", (dir / "pose.json").string(), "--transcript",
                       (dir / "transcript.json").string(), "--out", (dir / "v").string()});
    CHECK_MESSAGE(a.code == 0, a.err);
}

TEST_CASE("cli: usage errors") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"dance"}).code == 2);
    CHECK(cli({"export", "--video", "x"}).code == 2);
}
