#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cocoela/io.hpp"
#include "cocoela/pipeline.hpp"

namespace {

using namespace cocoela;
using pipeline::PipelineConfig;
using pipeline::Stage;

struct Options {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string mode;
};

PipelineConfig resolve_config(const Options& opt, bool from_manifest)
{
    PipelineConfig config;
    if (!opt.config_path.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(io::read_file(opt.config_path));
        } catch (const nlohmann::json::parse_error& ex) {
            throw ValidationError("cannot parse config '" + opt.config_path + "': " + ex.what());
        }
        config = PipelineConfig::from_json(j);
    } else if (from_manifest && !opt.out.empty() &&
               std::filesystem::exists(std::filesystem::path(opt.out) / pipeline::kManifestName)) {
        config = pipeline::config_from_manifest(opt.out);
    }
    if (!opt.out.empty()) {
        config.output_dir = opt.out;
    }
    if (opt.seed) {
        config.master_seed = *opt.seed;
    }
    if (opt.threads) {
        config.threads = *opt.threads;
    }
    config.validate();
    return config;
}

int report(const std::exception& ex, bool validation)
{
    std::cerr << "error: " << ex.what() << '\n';
    return validation ? 1 : 2;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Landscape-feature complementarity analysis of BBOB and generated problems"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "pipeline config JSON")->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "artifact directory");
        sub->add_option("--seed", opt.seed, "master seed");
        sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--mode", opt.mode, "restrict to one projection mode")
            ->check(CLI::IsMember({"coco-into-gen", "gen-into-coco", "joint"}));
    };

    struct Command {
        const char* name;
        const char* help;
        std::optional<Stage> stage;
    };
    const Command commands[] = {
        {"generate", "generate problems and BBOB metadata", Stage::Generate},
        {"sample", "evaluate the sample design on every problem", Stage::Sample},
        {"features", "compute landscape features", Stage::Features},
        {"project", "scale and project feature matrices", Stage::Project},
        {"embed", "t-SNE embeddings", Stage::Embed},
        {"correlate", "correlation graphs and separation report", Stage::Correlate},
        {"pipeline", "run every stage", std::nullopt},
    };
    std::vector<std::pair<CLI::App*, std::optional<Stage>>> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_common(sub);
        subs.emplace_back(sub, c.stage);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    std::vector<subspace::ProjectionMode> only;
    try {
        if (!opt.mode.empty()) {
            only.push_back(subspace::parse_mode(opt.mode));
        }
        for (const auto& [sub, stage] : subs) {
            if (!sub->parsed()) {
                continue;
            }
            if (!stage) {
                auto config = resolve_config(opt, false);
                if (!only.empty()) {
                    config.projection_modes = only;
                }
                pipeline::run_pipeline(config);
                std::cout << "pipeline complete: " << config.output_dir.string() << '\n';
            } else {
                const auto config = resolve_config(opt, *stage != Stage::Generate);
                pipeline::run_stage(*stage, config, only);
                std::cout << pipeline::to_string(*stage) << " complete: " << config.output_dir.string() << '\n';
            }
        }
    } catch (const pipeline::StageFailure& ex) {
        return report(ex, ex.is_validation());
    } catch (const ValidationError& ex) {
        return report(ex, true);
    } catch (const std::exception& ex) {
        return report(ex, false);
    }
    return 0;
}
