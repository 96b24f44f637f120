#pragma once

#include <map>
#include <string>
#include <vector>

#include "eegbg/abnormality.hpp"
#include "eegbg/artifact.hpp"
#include "eegbg/llm_client.hpp"
#include "eegbg/preprocess.hpp"

namespace eegbg {

// Whole-pipeline configuration. Defaults are the published operating points
// wherever the source material states one; everything is overridable from a
// key = value config file with ${ENV_VAR} interpolation.
struct PipelineConfig {
    ReferenceScheme reference = ReferenceScheme::Average;
    std::string rest_matrix_path;

    double epoch_len_s = 4.0;
    double crop_seconds = 0.0;  // 0 = no cropping

    WakeSelectionConfig selection;
    ArtifactConfig artifact;
    AbnormalityThresholds thresholds;
    MultitaperConfig multitaper;

    bool repair = true;
    std::vector<std::string> pdr_model_paths;  // empty -> spectral peak baseline

    std::string generator_provider;
    std::vector<std::string> verifier_providers;
    std::map<std::string, LlmProviderConfig> providers;
    int llm_max_inflight = 4;

    std::string output_dir = "out";
    bool export_psd_csv = false;
    bool export_mask_csv = false;

    // Parses a config file; unknown keys are errors. Missing file -> defaults
    // only when `allow_missing`.
    static PipelineConfig from_file(const std::string& path, bool allow_missing = false);
    void apply_line(const std::string& key, const std::string& value);

    // Canonical key = value dump (stable order) used for run provenance.
    std::string echo() const;
};

}  // namespace eegbg
