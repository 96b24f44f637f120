#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eegbg/abnormality.hpp"
#include "eegbg/artifact.hpp"
#include "eegbg/config.hpp"
#include "eegbg/features.hpp"
#include "eegbg/report.hpp"

namespace eegbg {

// Test seam: injected clients replace the HTTP clients built from config.
struct LlmClientSet {
    LlmClient* generator = nullptr;
    std::vector<LlmClient*> verifiers;
};

struct AnalyzeOptions {
    bool no_llm = false;      // stop after features.json
    std::string recording_id;  // defaults to the EDF basename
    std::string annotations_path;
    LlmClientSet clients;  // optional injection (tests, mock runs)
};

struct AnalyzeResult {
    std::string recording_id;
    BackgroundFeatures features;
    AbnormalityFindings findings;
    ReportFeatures report_features;
    std::optional<GeneratedReport> report;
    std::optional<VerificationResult> verification;
    WakeSelectionResult selection;
    ArtifactMask artifact_mask;
    std::vector<std::string> warnings;
    std::string features_path, report_path, verify_path, run_meta_path;
};

// The full per-recording pipeline: ingest -> montage -> rereference -> crop
// -> epoch -> PSD -> wake selection -> artifact detect/repair -> background
// features -> PDR -> abnormality rules -> feature JSON -> (report ->
// verification). Outputs land in config.output_dir as
// <id>.features.json / <id>.report.txt / <id>.verify.json plus <id>.run.json
// with the config echo and input hashes; all writes are atomic.
AnalyzeResult run_analyze(const std::string& edf_path, const PipelineConfig& config,
                          const AnalyzeOptions& options = {});

// Batch mode: a worker pool across recordings; each recording runs the
// sequential pipeline and writes its outputs atomically. Returns the number
// of failures (their error text goes to stderr and <id>.error.json).
int run_batch(const std::vector<std::string>& edf_paths, const PipelineConfig& config,
              const AnalyzeOptions& options, int workers);

}  // namespace eegbg
