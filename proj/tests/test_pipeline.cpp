#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "cocoela/io.hpp"
#include "cocoela/pipeline.hpp"

using namespace cocoela;
using namespace cocoela::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("cocoela_test_" + name);
    fs::remove_all(p);
    return p;
}

PipelineConfig tiny(const fs::path& out)
{
    PipelineConfig c;
    c.dimension = 2;
    c.generated_count = 8;
    c.sample_multiplier = 25;
    c.tsne.perplexity = 5;
    c.tsne.iterations = 300;
    c.correlation_threshold = 0.9;
    c.output_dir = out;
    return c;
}

std::map<std::string, std::string> tree_contents(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file() && e.path().filename() != kManifestName) {
            out[fs::relative(e.path(), root).string()] = io::read_file(e.path());
        }
    }
    return out;
}

nlohmann::json manifest(const fs::path& root)
{
    auto m = nlohmann::json::parse(io::read_file(root / kManifestName));
    for (auto& [name, stage] : m["stages"].items()) {
        stage.erase("seconds");
    }
    return m;
}

}  // namespace

TEST_CASE("config parsing and validation")
{
    const auto d = PipelineConfig::from_json(nlohmann::json::object());
    CHECK(d.dimension == 10);
    CHECK(d.generated_count == 500);
    CHECK(d.sample_size() == 2000);
    CHECK(d.projection_modes.size() == 3);
    CHECK_THROWS_AS(PipelineConfig::from_json({{"dimension", 1}}), ValidationError);
    CHECK_THROWS_AS(PipelineConfig::from_json({{"dimension", -3}}), ValidationError);
    CHECK_THROWS_AS(PipelineConfig::from_json({{"colour", "red"}}), ValidationError);
    CHECK_THROWS_AS(PipelineConfig::from_json({{"energy_threshold", 0}}), ValidationError);
    CHECK_THROWS_AS(PipelineConfig::from_json({{"projection_modes", {"joint", "nope"}}}), ValidationError);
    const auto c = PipelineConfig::from_json({{"dimension", 5}, {"projection_modes", {"joint"}}, {"sampling", "uniform"}});
    CHECK(c.dimension == 5);
    CHECK(c.projection_modes.size() == 1);
    CHECK(PipelineConfig::from_json(c.snapshot()).snapshot() == c.snapshot());
}

TEST_CASE("tiny pipeline inventory, determinism and composability")
{
    const auto a = scratch("a");
    const auto b = scratch("b");
    const auto s = scratch("s");
    run_pipeline(tiny(a));
    run_pipeline(tiny(b));
    for (const char* f : {"generated.json", "coco.json", "features.csv", "dropped_features.json"}) {
        CHECK(fs::exists(a / f));
    }
    for (const char* mode : {"coco-into-gen", "gen-into-coco", "joint"}) {
        for (const char* f : {"coordinates.csv", "model.json", "embedding.csv", "embedding.svg", "corr_matrix.csv",
                              "corr_edges.csv", "corr_graph.svg", "separation.json"}) {
            CHECK(fs::exists(a / mode / f));
        }
    }
    CHECK(tree_contents(a) == tree_contents(b));
    CHECK(manifest(a) == manifest(b));
    CHECK(manifest(a)["status"] == "ok");

    // Every file written has a digest.
    const auto m = manifest(a);
    std::size_t recorded = 0;
    for (const auto& [name, stage] : m["stages"].items()) {
        for (const auto& [rel, digest] : stage["outputs"].items()) {
            CHECK(io::sha256_hex(io::read_file(a / rel)) == digest.get<std::string>());
            ++recorded;
        }
    }
    CHECK(recorded == tree_contents(a).size());

    for (Stage st : kAllStages) {
        run_stage(st, tiny(s));
    }
    CHECK(tree_contents(s) == tree_contents(a));

    auto threaded = tiny(scratch("t"));
    threaded.threads = 3;
    run_pipeline(threaded);
    CHECK(tree_contents(threaded.output_dir) == tree_contents(a));
}

TEST_CASE("corrupt upstream file is named with its digest")
{
    const auto d = scratch("corrupt");
    const auto c = tiny(d);
    run_stage(Stage::Generate, c);
    const auto expected = manifest(d)["stages"]["generate"]["outputs"]["generated.json"].get<std::string>();
    io::write_file(d / "generated.json", "[]");
    try {
        run_stage(Stage::Sample, c);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("generated.json") != std::string::npos);
        CHECK(msg.find(expected) != std::string::npos);
    }
    fs::remove(d / "coco.json");
    CHECK_THROWS_AS(run_stage(Stage::Sample, c), ValidationError);
}

TEST_CASE("features on zero problems is an error")
{
    const auto d = scratch("zero");
    CHECK_THROWS_AS(run_stage(Stage::Features, tiny(d)), ValidationError);
    CHECK_FALSE(fs::exists(d / "features.csv"));
}

TEST_CASE("config mismatch with an existing manifest")
{
    const auto d = scratch("mismatch");
    run_stage(Stage::Generate, tiny(d));
    auto other = tiny(d);
    other.master_seed = 7;
    CHECK_THROWS_AS(run_stage(Stage::Sample, other), ValidationError);
    CHECK(config_from_manifest(d).snapshot() == tiny(d).snapshot());
}

TEST_CASE("a failing stage leaves a FAILED marker and keeps outputs")
{
    const auto d = scratch("fail");
    auto c = tiny(d);
    c.tsne.perplexity = 25;
    try {
        run_pipeline(c);
        FAIL("expected StageFailure");
    } catch (const StageFailure& e) {
        CHECK(e.stage() == Stage::Embed);
        CHECK(e.is_validation());
        CHECK(std::string(e.what()).find("embed") != std::string::npos);
    }
    const auto m = manifest(d);
    CHECK(m["status"] == "FAILED");
    CHECK(m["failure"]["stage"] == "embed");
    CHECK(fs::exists(d / "features.csv"));
    CHECK(fs::exists(d / "joint" / "coordinates.csv"));
}

#ifdef COCOELA_CLI_PATH
TEST_CASE("cli exit codes")
{
    const std::string cli = COCOELA_CLI_PATH;
    const auto d = scratch("cli");
    fs::create_directories(d);
    io::write_file(d / "bad.json", R"({"dimension": 1})");
    io::write_file(d / "ok.json", tiny(d / "run").snapshot().dump());
    auto run = [](const std::string& cmd) {
        const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WEXITSTATUS(rc);
    };
    CHECK(run(cli + " pipeline --config " + (d / "bad.json").string() + " --out " + (d / "x").string()) == 1);
    CHECK(run(cli + " features --out " + (d / "empty").string()) == 1);
    CHECK(run(cli + " bogus") == 1);
    CHECK(run(cli + " generate --config " + (d / "ok.json").string() + " --out " + (d / "run").string()) == 0);
    CHECK(run(cli + " sample --out " + (d / "run").string()) == 0);
    CHECK(run(cli + " sample --out " + (d / "run").string() + " --seed 99") == 1);
    CHECK(fs::exists(d / "run" / "samples" / "coco_24.csv"));
}
#endif
