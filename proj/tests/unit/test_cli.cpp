#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kgatlas/cli.hpp"
#include "kgatlas/ingest.hpp"

using namespace kgatlas;
namespace fs = std::filesystem;

namespace {

const fs::path kGolden = KGATLAS_FIXTURE_DIR "/golden";

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

/// Fresh scratch directory, removed on destruction.
struct Scratch {
    fs::path dir;
    explicit Scratch(std::string_view name) : dir(fs::temp_directory_path() / ("kgatlas_cli_" + std::string(name))) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string write(std::string_view name, std::string_view text) const {
        std::ofstream(dir / name, std::ios::binary) << text;
        return (dir / name).string();
    }
};

}  // namespace

TEST_CASE("preprocess reproduces the golden fixture") {
    Scratch scratch("golden");
    auto out_dir = (scratch.dir / "out").string();
    auto result = run({"preprocess", (kGolden / "triples.csv").string(), "--abbreviations",
                       (kGolden / "abbreviations.csv").string(), "--merge-map", (kGolden / "merge_map.csv").string(),
                       "--out-dir", out_dir});
    REQUIRE(result.code == cli::kExitOk);
    CHECK(read_file(fs::path(out_dir) / "triples.csv") == read_file(kGolden / "expected_triples.csv"));
    CHECK(read_file(fs::path(out_dir) / "merge_candidates.csv") ==
          read_file(kGolden / "expected_merge_candidates.csv"));
    CHECK(nlohmann::json::parse(read_file(fs::path(out_dir) / "report.json")) ==
          nlohmann::json::parse(read_file(kGolden / "expected_report.json")));
    CHECK(fs::exists(fs::path(out_dir) / "freq_before.csv"));
    CHECK(fs::exists(fs::path(out_dir) / "freq_after.csv"));
}

TEST_CASE("preprocess --only-stage runs a single stage") {
    Scratch scratch("only_stage");
    auto input = scratch.write("in.csv", "a,r,b\na,r,b\nc,s,d\n");
    auto out_dir = (scratch.dir / "out").string();
    auto result = run({"preprocess", input, "--only-stage", "3", "--out-dir", out_dir});
    REQUIRE(result.code == cli::kExitOk);
    auto report = nlohmann::json::parse(read_file(fs::path(out_dir) / "report.json"));
    CHECK(report["stages_run"] == nlohmann::json::array({3}));
    CHECK(report["duplicates_removed"] == 1);
    CHECK(read_file(fs::path(out_dir) / "triples.csv") == "a,r,b,,,2\nc,s,d,,,1\n");
}

TEST_CASE("stats on a triangle") {
    Scratch scratch("stats");
    auto input = scratch.write("tri.csv", "a,r,b\nb,r,c\nc,r,a\n");
    auto text = run({"stats", input});
    REQUIRE(text.code == cli::kExitOk);
    CHECK(text.out.find("nodes: 3") != std::string::npos);
    CHECK(text.out.find("clustering_coefficient: 1.000000") != std::string::npos);

    auto json = run({"stats", input, "--json"});
    REQUIRE(json.code == cli::kExitOk);
    CHECK(nlohmann::json::parse(json.out)["edge_count"] == 3);
}

TEST_CASE("usage errors exit with 2") {
    auto unknown = run({"frobnicate"});
    CHECK(unknown.code == cli::kExitUsage);
    CHECK(unknown.err.find("E_USAGE: unknown subcommand 'frobnicate'") != std::string::npos);
    CHECK(unknown.err.find("preprocess") != std::string::npos);

    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"stats"}).code == cli::kExitUsage);
    CHECK(run({"preprocess", "/nonexistent/kgatlas.csv"}).code == cli::kExitUsage);
}

TEST_CASE("runtime errors exit with 1") {
    Scratch scratch("errors");
    auto bad = scratch.write("bad.csv", "a,r,\xC3\x28\n");
    auto result = run({"stats", bad});
    CHECK(result.code == cli::kExitFailure);
    CHECK(result.err.find("E_ENCODING") != std::string::npos);

    auto input = scratch.write("in.csv", "a,r,b\n");
    auto chain = scratch.write("chain.csv", "a,b\nb,c\n");
    auto merged = run({"preprocess", input, "--merge-map", chain, "--out-dir", (scratch.dir / "o").string()});
    CHECK(merged.code == cli::kExitFailure);
    CHECK(merged.err.find("E_MERGE_CHAIN") != std::string::npos);
}

TEST_CASE("help lists subcommands and defaults") {
    auto top = run({"--help"});
    CHECK(top.code == cli::kExitOk);
    for (const char* name : {"extract", "preprocess", "stats", "export-json", "export-svg", "serve"}) {
        CHECK(top.out.find(name) != std::string::npos);
    }
    auto sub = run({"preprocess", "--help"});
    CHECK(sub.code == cli::kExitOk);
    CHECK(sub.out.find("--min-relation-count") != std::string::npos);
    CHECK(sub.out.find("0.6") != std::string::npos);
    auto svg = run({"export-svg", "--help"});
    CHECK(svg.out.find("1000") != std::string::npos);
    CHECK(svg.out.find("--seed") != std::string::npos);

    auto version = run({"--version"});
    CHECK(version.code == cli::kExitOk);
    CHECK(version.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("export-svg is reproducible and export-json filters") {
    Scratch scratch("export");
    auto input = scratch.write("g.csv", "a,favor,b\na,opposes,b\nb,r,c\nc,r,a\nc,r,d\n");
    auto first = run({"export-svg", input, "--seed", "7"});
    auto second = run({"export-svg", input, "--seed", "7"});
    REQUIRE(first.code == cli::kExitOk);
    CHECK(first.out.starts_with("<?xml"));
    CHECK(first.out == second.out);
    CHECK(run({"export-svg", input, "--seed", "8"}).out != first.out);

    auto file = (scratch.dir / "g.svg").string();
    REQUIRE(run({"export-svg", input, "--seed", "7", "-o", file}).code == cli::kExitOk);
    CHECK(read_file(file) == first.out);

    auto json = run({"export-json", input, "--min-degree", "2"});
    REQUIRE(json.code == cli::kExitOk);
    auto payload = nlohmann::json::parse(json.out);
    CHECK(payload["nodes"].size() == 3);
}

TEST_CASE("extract with the stub backend") {
    Scratch scratch("extract");
    auto doc = scratch.write("paper7.txt", "Local governments favor investment. Trade shapes growth.");
    auto out = (scratch.dir / "triples.csv").string();
    auto result = run({"extract", doc, "-o", out});
    REQUIRE(result.code == cli::kExitOk);
    auto parsed = parse_triplets(read_file(out), TripleFormat::Delimited);
    REQUIRE(parsed.triples.size() == 2);
    CHECK(parsed.triples[0].paper_id == "paper7");
    CHECK(parsed.triples[0].predicate == "favor");

    auto empty = scratch.write("empty.txt", "  \n");
    auto failed = run({"extract", empty});
    CHECK(failed.code == cli::kExitFailure);
    CHECK(failed.err.find("E_EMPTY_DOC") != std::string::npos);
}
