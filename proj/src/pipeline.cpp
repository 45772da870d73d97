#include "cocoela/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <iostream>
#include <optional>

#include "cocoela/ela.hpp"
#include "cocoela/io.hpp"
#include "cocoela/problem.hpp"
#include "cocoela/rng.hpp"
#include "cocoela/svg.hpp"

namespace cocoela::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kTagDesign = 41;
constexpr std::uint64_t kTagTour = 42;
constexpr std::uint64_t kTagTsne = 43;

constexpr const char* kGeneratedFile = "generated.json";
constexpr const char* kCocoFile = "coco.json";
constexpr const char* kFeaturesFile = "features.csv";
constexpr const char* kDroppedFile = "dropped_features.json";

std::string mode_dir(subspace::ProjectionMode mode)
{
    return std::string(subspace::to_string(mode));
}

std::string strategy_name(sampling::Strategy s)
{
    return s == sampling::Strategy::LatinHypercube ? "lhs" : "uniform";
}

sampling::Strategy parse_strategy(const std::string& s)
{
    if (s == "lhs") {
        return sampling::Strategy::LatinHypercube;
    }
    if (s == "uniform") {
        return sampling::Strategy::Uniform;
    }
    throw ValidationError("unknown sampling strategy '" + s + "'; expected lhs or uniform");
}

/// Output directory plus its manifest. Every file a stage writes goes
/// through write(), and every upstream file it reads through read(), so
/// the manifest always holds a digest for each file on disk.
class Workspace {
public:
    explicit Workspace(const PipelineConfig& config) : root_(config.output_dir)
    {
        const fs::path path = root_ / kManifestName;
        const json snapshot = config.snapshot();
        if (fs::exists(path)) {
            try {
                manifest_ = json::parse(io::read_file(path));
            } catch (const json::parse_error& ex) {
                throw ValidationError("corrupt manifest '" + path.string() + "': " + ex.what());
            }
            if (manifest_.value("config", json()) != snapshot) {
                throw ValidationError("config does not match the one recorded in '" + path.string() +
                                      "'; use a fresh output directory");
            }
        } else {
            manifest_ = {{"tool", "cocoela"},
                         {"version", kToolVersion},
                         {"config", snapshot},
                         {"stages", json::object()},
                         {"dropped_features", json::array()},
                         {"status", "incomplete"}};
        }
    }

    json& manifest() { return manifest_; }

    void begin(Stage stage)
    {
        current_ = std::string(to_string(stage));
        manifest_["stages"][current_] = {{"status", "running"}, {"outputs", json::object()}};
    }

    void finish(double seconds)
    {
        auto& entry = manifest_["stages"][current_];
        entry["status"] = "ok";
        entry["seconds"] = seconds;
        if (manifest_.contains("failure") && manifest_["failure"].value("stage", "") == current_) {
            manifest_.erase("failure");
        }
        bool complete = true;
        for (Stage s : kAllStages) {
            const auto name = std::string(to_string(s));
            complete = complete && manifest_["stages"].contains(name) &&
                       manifest_["stages"][name].value("status", "") == "ok";
        }
        manifest_["status"] = manifest_.contains("failure") ? "FAILED" : (complete ? "ok" : "incomplete");
        save();
    }

    void fail(Stage stage, const std::string& cause)
    {
        const auto name = std::string(to_string(stage));
        manifest_["stages"][name]["status"] = "FAILED";
        manifest_["failure"] = {{"stage", name}, {"cause", cause}};
        manifest_["status"] = "FAILED";
        save();
    }

    void write(const std::string& rel, const std::string& content)
    {
        io::write_file(root_ / rel, content);
        manifest_["stages"][current_]["outputs"][rel] = io::sha256_hex(content);
    }

    std::string read(const std::string& rel) const
    {
        std::optional<std::string> expected;
        for (const auto& [name, entry] : manifest_["stages"].items()) {
            if (entry.contains("outputs") && entry["outputs"].contains(rel)) {
                expected = entry["outputs"][rel].get<std::string>();
            }
        }
        if (!expected) {
            throw ValidationError("upstream file '" + rel + "' is not recorded in the manifest; run the stage that "
                                  "produces it first");
        }
        const fs::path path = root_ / rel;
        if (!fs::exists(path)) {
            throw ValidationError("missing upstream file '" + path.string() + "' (expected digest " + *expected + ")");
        }
        std::string content = io::read_file(path);
        const std::string actual = io::sha256_hex(content);
        if (actual != *expected) {
            throw ValidationError("corrupt upstream file '" + path.string() + "': expected digest " + *expected +
                                  ", found " + actual);
        }
        return content;
    }

    std::vector<std::string> outputs_of(Stage stage) const
    {
        std::vector<std::string> out;
        const auto name = std::string(to_string(stage));
        if (manifest_["stages"].contains(name) && manifest_["stages"][name].value("status", "") == "ok") {
            for (const auto& [rel, digest] : manifest_["stages"][name]["outputs"].items()) {
                out.push_back(rel);
            }
        }
        return out;
    }

    void save() const { io::write_file(root_ / kManifestName, manifest_.dump(2) + "\n"); }

private:
    fs::path root_;
    json manifest_;
    std::string current_;
};

std::vector<Problem> load_problems(const PipelineConfig& config, Workspace& ws)
{
    std::vector<Problem> problems;
    const json coco = json::parse(ws.read(kCocoFile));
    for (const auto& meta : coco) {
        problems.push_back(bbob_from_metadata(meta));
    }
    for (auto& g : treegen::problem_set_from_json(json::parse(ws.read(kGeneratedFile)))) {
        problems.push_back(make_generated(std::move(g)));
    }
    for (const auto& p : problems) {
        if (p.dimension() != config.dimension) {
            throw ValidationError(to_string(p.id()) + " has dimension " + std::to_string(p.dimension()) +
                                  ", config says " + std::to_string(config.dimension));
        }
    }
    return problems;
}

ProblemId id_from_sample_name(const std::string& rel)
{
    const auto name = fs::path(rel).stem().string();
    const auto us = name.rfind('_');
    if (us == std::string::npos) {
        throw ValidationError("cannot derive a problem id from '" + rel + "'");
    }
    std::string set = name.substr(0, us);
    std::transform(set.begin(), set.end(), set.begin(), [](unsigned char c) { return std::toupper(c); });
    return {parse_set_label(set), static_cast<std::size_t>(std::stoull(name.substr(us + 1)))};
}

void stage_generate(const PipelineConfig& config, Workspace& ws)
{
    const auto generated =
        treegen::generate_set(config.master_seed, config.generated_count, config.dimension, config.generator,
                              config.threads);
    ws.write(kGeneratedFile, treegen::problem_set_to_json(generated).dump(1) + "\n");
    json coco = json::array();
    for (const auto& p : bbob_suite(config.dimension, config.coco_instance_seed)) {
        coco.push_back(bbob_metadata(p));
    }
    ws.write(kCocoFile, coco.dump(1) + "\n");
}

void stage_sample(const PipelineConfig& config, Workspace& ws)
{
    const auto problems = load_problems(config, ws);
    const sampling::SamplePlan plan{config.sampling_strategy, config.sample_size(),
                                    derive_seed({config.master_seed, kTagDesign})};
    const RowMatrix design =
        sampling::build_design(plan, BoxBounds::cube(config.dimension, kDomainLower, kDomainUpper));
    for (const auto& p : problems) {
        const auto s = sampling::evaluate_design(p, design, config.threads);
        std::ostringstream os;
        sampling::write_csv(os, s);
        ws.write("samples/" + sampling::file_name(p.id()), os.str());
    }
}

void stage_features(const PipelineConfig& config, Workspace& ws)
{
    std::vector<std::string> files;
    for (const auto& rel : ws.outputs_of(Stage::Sample)) {
        if (rel.rfind("samples/", 0) == 0) {
            files.push_back(rel);
        }
    }
    if (files.empty()) {
        throw ValidationError("no problems to extract features from (the sample stage recorded no samples)");
    }
    std::vector<std::string> contents;
    contents.reserve(files.size());
    for (const auto& rel : files) {
        contents.push_back(ws.read(rel));
    }
    const std::uint64_t tour_seed = derive_seed({config.master_seed, kTagTour});
    std::vector<ela::FeatureVector> vectors(files.size());
    std::vector<std::exception_ptr> errors(files.size());
    const auto n = static_cast<std::int64_t>(files.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(config.threads, 1))
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            std::istringstream in(contents[k]);
            const auto s = sampling::read_csv(in, id_from_sample_name(files[k]));
            vectors[k] = ela::extract_all(s, tour_seed);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::sort(vectors.begin(), vectors.end(),
              [](const ela::FeatureVector& a, const ela::FeatureVector& b) { return a.problem_id < b.problem_id; });
    ws.write(kFeaturesFile, io::feature_matrix_to_csv(subspace::FeatureMatrix::from_vectors(vectors)));
}

void stage_project(const PipelineConfig& config, Workspace& ws, const std::vector<subspace::ProjectionMode>& modes)
{
    const auto all = io::feature_matrix_from_csv(ws.read(kFeaturesFile));
    const auto coco = all.select_set(SetLabel::Coco);
    const auto gen = all.select_set(SetLabel::Generated);
    if (coco.row_count() < 2 || gen.row_count() < 2) {
        throw ValidationError("projection needs at least two problems in each set");
    }
    const auto cleaned = subspace::clean_columns(coco, gen);
    for (const auto& d : cleaned.dropped) {
        std::cerr << "dropping feature with invalid values: " << d << '\n';
    }
    ws.manifest()["dropped_features"] = cleaned.dropped;
    ws.write(kDroppedFile, json(cleaned.dropped).dump() + "\n");
    for (auto mode : modes) {
        const auto proj = subspace::run_projection(mode, cleaned.a, cleaned.b, config.energy_threshold);
        const auto dir = mode_dir(mode) + "/";
        ws.write(dir + "coordinates.csv", io::coordinates_to_csv(proj.rows, proj.coordinates));
        ws.write(dir + "model.json", subspace::model_to_json(proj.model).dump(1) + "\n");
        if (config.correlation_source == "features") {
            const auto both = subspace::FeatureMatrix::concat(cleaned.a, cleaned.b);
            ws.write(dir + "scaled_features.csv",
                     io::coordinates_to_csv(both.rows(), subspace::minmax_apply(both, proj.model.scaling)));
        }
    }
}

void stage_embed(const PipelineConfig& config, Workspace& ws, const std::vector<subspace::ProjectionMode>& modes)
{
    for (auto mode : modes) {
        const auto dir = mode_dir(mode) + "/";
        const auto coords = io::coordinates_from_csv(ws.read(dir + "coordinates.csv"));
        auto params = config.tsne;
        params.seed = derive_seed({config.master_seed, config.tsne.seed, kTagTsne});
        params.threads = config.threads;
        const auto e = analysis::tsne(coords.values, coords.rows, params);
        ws.write(dir + "embedding.csv", io::embedding_to_csv(e));
        ws.write(dir + "embedding.svg", svg::plot_embedding(e, "t-SNE, " + mode_dir(mode)));
        ws.write(dir + "embedding.json",
                 json({{"initial_kl", e.initial_kl}, {"final_kl", e.final_kl}, {"rows", e.rows.size()}}).dump(1) +
                     "\n");
    }
}

void stage_correlate(const PipelineConfig& config, Workspace& ws, const std::vector<subspace::ProjectionMode>& modes)
{
    for (auto mode : modes) {
        const auto dir = mode_dir(mode) + "/";
        const auto coords = io::coordinates_from_csv(ws.read(dir + "coordinates.csv"));
        const auto source = config.correlation_source == "features"
                                ? io::coordinates_from_csv(ws.read(dir + "scaled_features.csv"))
                                : coords;
        if (source.values.cols() < 2) {
            throw ValidationError(mode_dir(mode) + ": correlation needs at least 2 components, have " +
                                  std::to_string(source.values.cols()) + "; raise energy_threshold");
        }
        const auto corr = analysis::pearson_matrix(source.values);
        if (corr.low_dimension) {
            std::cerr << "warning: " << mode_dir(mode) << ": correlating vectors with only "
                      << source.values.cols() << " components\n";
        }
        const auto graph = analysis::build_graph(corr, source.rows, config.correlation_threshold);
        ws.write(dir + "corr_matrix.csv", io::correlation_matrix_to_csv(corr, source.rows));
        ws.write(dir + "corr_edges.csv", io::edges_to_csv(graph));
        ws.write(dir + "corr_graph.svg", svg::plot_graph(graph, "Pearson correlation, " + mode_dir(mode)));

        const auto rep = analysis::silhouette(coords.values, coords.rows, mode_dir(mode));
        json j = analysis::report_to_json(rep);
        j["components"] = coords.values.cols();
        j["correlation_source"] = config.correlation_source;
        j["correlation_components"] = source.values.cols();
        j["low_dimension_warning"] = corr.low_dimension;
        j["edge_count"] = graph.edges.size();
        ws.write(dir + "separation.json", j.dump(1) + "\n");
    }
}

}  // namespace

std::string_view to_string(Stage stage)
{
    switch (stage) {
    case Stage::Generate: return "generate";
    case Stage::Sample: return "sample";
    case Stage::Features: return "features";
    case Stage::Project: return "project";
    case Stage::Embed: return "embed";
    case Stage::Correlate: return "correlate";
    }
    return "unknown";
}

StageFailure::StageFailure(Stage stage, const std::string& cause, bool validation)
    : std::runtime_error("stage " + std::string(to_string(stage)) + " failed: " + cause),
      stage_(stage),
      validation_(validation)
{
}

void PipelineConfig::validate() const
{
    if (dimension < 2) {
        throw ValidationError("dimension must be >= 2, got " + std::to_string(dimension));
    }
    if (generated_count < 2) {
        throw ValidationError("generated_count must be >= 2");
    }
    if (sample_multiplier < 1) {
        throw ValidationError("sample_multiplier must be positive");
    }
    if (!(energy_threshold > 0 && energy_threshold <= 1)) {
        throw ValidationError("energy_threshold must lie in (0, 1]");
    }
    if (!(correlation_threshold >= 0 && correlation_threshold <= 1)) {
        throw ValidationError("correlation_threshold must lie in [0, 1]");
    }
    if (projection_modes.empty()) {
        throw ValidationError("at least one projection mode is required");
    }
    if (correlation_source != "svd" && correlation_source != "features") {
        throw ValidationError("correlation_source must be svd or features");
    }
    if (!(tsne.perplexity > 0) || tsne.iterations < 1 || !(tsne.learning_rate > 0) ||
        !(tsne.exaggeration_factor > 0) || tsne.exaggeration_iters < 0) {
        throw ValidationError("t-SNE parameters must be positive");
    }
    if (threads < 1) {
        throw ValidationError("threads must be >= 1");
    }
    generator.validate();
}

json PipelineConfig::snapshot() const
{
    json modes = json::array();
    for (auto m : projection_modes) {
        modes.push_back(subspace::to_string(m));
    }
    return {{"dimension", dimension},
            {"generated_count", generated_count},
            {"sample_multiplier", sample_multiplier},
            {"sample_size", sample_size()},
            {"master_seed", master_seed},
            {"coco_instance_seed", coco_instance_seed},
            {"energy_threshold", energy_threshold},
            {"projection_modes", modes},
            {"sampling", strategy_name(sampling_strategy)},
            {"generator",
             {{"max_depth", generator.max_depth},
              {"constant_range", {generator.constant_lo, generator.constant_hi}},
              {"terminal_base_prob", generator.terminal_base_prob},
              {"variable_vs_constant_prob", generator.variable_vs_constant_prob},
              {"value_cap", generator.rejection.value_cap},
              {"min_variance", generator.rejection.min_variance},
              {"max_attempts", generator.rejection.max_attempts}}},
            {"tsne",
             {{"perplexity", tsne.perplexity},
              {"iterations", tsne.iterations},
              {"learning_rate", tsne.learning_rate},
              {"exaggeration_factor", tsne.exaggeration_factor},
              {"exaggeration_iters", tsne.exaggeration_iters},
              {"momentum_switch_iter", tsne.momentum_switch_iter},
              {"initial_momentum", tsne.initial_momentum},
              {"final_momentum", tsne.final_momentum},
              {"seed", tsne.seed}}},
            {"correlation_threshold", correlation_threshold},
            {"correlation_source", correlation_source}};
}

PipelineConfig PipelineConfig::from_json(const json& j)
{
    if (!j.is_object()) {
        throw ValidationError("pipeline config must be a JSON object");
    }
    static const std::vector<std::string> known = {
        "dimension",        "generated_count", "sample_multiplier", "sample_size",           "master_seed",
        "coco_instance_seed", "energy_threshold", "projection_modes", "sampling",             "generator",
        "tsne",             "correlation_threshold", "correlation_source", "output_dir",     "threads"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ValidationError("unknown config key '" + key + "'");
        }
    }
    PipelineConfig c;
    try {
        // Negative numbers would wrap in unsigned fields.
        for (const char* key : {"dimension", "generated_count", "sample_multiplier", "master_seed",
                                "coco_instance_seed", "threads"}) {
            if (j.contains(key) && (!j[key].is_number_integer() || j[key].get<long long>() < 0)) {
                throw ValidationError(std::string("config key '") + key + "' must be a non-negative integer");
            }
        }
        c.dimension = j.value("dimension", c.dimension);
        c.generated_count = j.value("generated_count", c.generated_count);
        c.sample_multiplier = j.value("sample_multiplier", c.sample_multiplier);
        c.master_seed = j.value("master_seed", c.master_seed);
        c.coco_instance_seed = j.value("coco_instance_seed", c.coco_instance_seed);
        c.energy_threshold = j.value("energy_threshold", c.energy_threshold);
        if (j.contains("projection_modes")) {
            c.projection_modes.clear();
            for (const auto& m : j["projection_modes"]) {
                c.projection_modes.push_back(subspace::parse_mode(m.get<std::string>()));
            }
        }
        if (j.contains("sampling")) {
            c.sampling_strategy = parse_strategy(j["sampling"].get<std::string>());
        }
        if (j.contains("generator")) {
            const auto& g = j["generator"];
            c.generator.max_depth = g.value("max_depth", c.generator.max_depth);
            if (g.contains("constant_range")) {
                c.generator.constant_lo = g["constant_range"].at(0).get<double>();
                c.generator.constant_hi = g["constant_range"].at(1).get<double>();
            }
            c.generator.terminal_base_prob = g.value("terminal_base_prob", c.generator.terminal_base_prob);
            c.generator.variable_vs_constant_prob =
                g.value("variable_vs_constant_prob", c.generator.variable_vs_constant_prob);
            c.generator.rejection.value_cap = g.value("value_cap", c.generator.rejection.value_cap);
            c.generator.rejection.min_variance = g.value("min_variance", c.generator.rejection.min_variance);
            c.generator.rejection.max_attempts = g.value("max_attempts", c.generator.rejection.max_attempts);
        }
        if (j.contains("tsne")) {
            const auto& t = j["tsne"];
            c.tsne.perplexity = t.value("perplexity", c.tsne.perplexity);
            c.tsne.iterations = t.value("iterations", c.tsne.iterations);
            c.tsne.learning_rate = t.value("learning_rate", c.tsne.learning_rate);
            c.tsne.exaggeration_factor = t.value("exaggeration_factor", c.tsne.exaggeration_factor);
            c.tsne.exaggeration_iters = t.value("exaggeration_iters", c.tsne.exaggeration_iters);
            c.tsne.momentum_switch_iter = t.value("momentum_switch_iter", c.tsne.momentum_switch_iter);
            c.tsne.initial_momentum = t.value("initial_momentum", c.tsne.initial_momentum);
            c.tsne.final_momentum = t.value("final_momentum", c.tsne.final_momentum);
            c.tsne.seed = t.value("seed", c.tsne.seed);
        }
        c.correlation_threshold = j.value("correlation_threshold", c.correlation_threshold);
        c.correlation_source = j.value("correlation_source", c.correlation_source);
        if (j.contains("output_dir")) {
            c.output_dir = j["output_dir"].get<std::string>();
        }
        c.threads = j.value("threads", c.threads);
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed pipeline config: ") + ex.what());
    }
    if (j.contains("sample_size") && j["sample_size"] != c.sample_size()) {
        throw ValidationError("config sample_size disagrees with sample_multiplier * dimension");
    }
    c.validate();
    return c;
}

PipelineConfig config_from_manifest(const fs::path& output_dir)
{
    const fs::path path = output_dir / kManifestName;
    if (!fs::exists(path)) {
        throw ValidationError("no manifest in '" + output_dir.string() + "'; pass --config or run generate first");
    }
    json m;
    try {
        m = json::parse(io::read_file(path));
    } catch (const json::parse_error& ex) {
        throw ValidationError("corrupt manifest '" + path.string() + "': " + ex.what());
    }
    PipelineConfig c = PipelineConfig::from_json(m.at("config"));
    c.output_dir = output_dir;
    return c;
}

void run_stage(Stage stage, const PipelineConfig& config, const std::vector<subspace::ProjectionMode>& only_modes)
{
    config.validate();
    std::vector<subspace::ProjectionMode> modes = config.projection_modes;
    if (!only_modes.empty()) {
        for (auto m : only_modes) {
            if (std::find(modes.begin(), modes.end(), m) == modes.end()) {
                throw ValidationError("mode " + std::string(subspace::to_string(m)) + " is not configured");
            }
        }
        modes = only_modes;
    }
    Workspace ws(config);
    ws.begin(stage);
    const auto start = std::chrono::steady_clock::now();
    try {
        switch (stage) {
        case Stage::Generate: stage_generate(config, ws); break;
        case Stage::Sample: stage_sample(config, ws); break;
        case Stage::Features: stage_features(config, ws); break;
        case Stage::Project: stage_project(config, ws, modes); break;
        case Stage::Embed: stage_embed(config, ws, modes); break;
        case Stage::Correlate: stage_correlate(config, ws, modes); break;
        }
    } catch (const std::exception& ex) {
        ws.fail(stage, ex.what());
        throw;
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    ws.finish(elapsed.count());
}

void run_pipeline(const PipelineConfig& config)
{
    config.validate();
    for (Stage stage : kAllStages) {
        try {
            run_stage(stage, config);
        } catch (const ValidationError& ex) {
            throw StageFailure(stage, ex.what(), true);
        } catch (const std::exception& ex) {
            throw StageFailure(stage, ex.what(), false);
        }
    }
}

}  // namespace cocoela::pipeline
