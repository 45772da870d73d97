#ifndef COCOELA_PIPELINE_HPP
#define COCOELA_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cocoela/analysis.hpp"
#include "cocoela/sampling.hpp"
#include "cocoela/subspace.hpp"
#include "cocoela/treegen.hpp"

namespace cocoela::pipeline {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kManifestName = "manifest.json";

struct PipelineConfig {
    std::size_t dimension = 10;
    std::size_t generated_count = 500;
    std::size_t sample_multiplier = 200;
    std::uint64_t master_seed = 42;
    std::uint64_t coco_instance_seed = 1;
    double energy_threshold = 0.95;
    std::vector<subspace::ProjectionMode> projection_modes = {std::begin(subspace::kAllModes),
                                                              std::end(subspace::kAllModes)};
    sampling::Strategy sampling_strategy = sampling::Strategy::LatinHypercube;
    treegen::GeneratorConfig generator;
    analysis::TsneParams tsne;
    double correlation_threshold = 0.95;
    /// "svd" correlates SVD coordinates; "features" correlates the scaled
    /// feature vectors instead, for comparison.
    std::string correlation_source = "svd";
    std::filesystem::path output_dir = "out";
    int threads = 1;

    void validate() const;
    std::size_t sample_size() const { return sample_multiplier * dimension; }

    /// Everything that determines the artifact contents (excludes the
    /// output directory and thread count).
    nlohmann::json snapshot() const;
    /// Missing keys keep their defaults; unknown keys are rejected.
    static PipelineConfig from_json(const nlohmann::json& j);
};

enum class Stage { Generate, Sample, Features, Project, Embed, Correlate };

inline constexpr Stage kAllStages[] = {Stage::Generate, Stage::Sample,  Stage::Features,
                                       Stage::Project,  Stage::Embed,   Stage::Correlate};

std::string_view to_string(Stage stage);

/// Raised by run_pipeline; carries the failing stage.
class StageFailure : public std::runtime_error {
public:
    StageFailure(Stage stage, const std::string& cause, bool validation);
    Stage stage() const { return stage_; }
    bool is_validation() const { return validation_; }

private:
    Stage stage_;
    bool validation_;
};

/// Runs one stage against config.output_dir and updates the manifest. The
/// manifest's config snapshot must agree with `config` when it exists.
/// A non-empty `only_modes` restricts the per-mode stages.
void run_stage(Stage stage, const PipelineConfig& config,
               const std::vector<subspace::ProjectionMode>& only_modes = {});

/// Every stage in order. On failure the manifest is marked FAILED and a
/// StageFailure is thrown; outputs already written are kept.
void run_pipeline(const PipelineConfig& config);

/// Config recorded in an existing artifact directory.
PipelineConfig config_from_manifest(const std::filesystem::path& output_dir);

}  // namespace cocoela::pipeline

#endif
