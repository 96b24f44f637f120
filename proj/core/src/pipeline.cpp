#include "eegbg/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "eegbg/annotations.hpp"
#include "eegbg/edf.hpp"
#include "eegbg/errors.hpp"
#include "eegbg/pdr_baseline.hpp"
#include "eegbg/pdr_network.hpp"
#include "eegbg/prompt_templates.hpp"
#include "eegbg/util.hpp"
#include "eegbg/version.hpp"

namespace eegbg {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string default_recording_id(const std::string& edf_path) {
    return fs::path(edf_path).stem().string();
}

std::string run_meta_json(const std::string& recording_id, const std::string& edf_path,
                          const std::string& annotations_path, const PipelineConfig& config,
                          const std::vector<std::string>& warnings) {
    ordered_json j;
    j["recording_id"] = recording_id;
    j["tool_version"] = kVersion;
    j["timestamp"] = utc_timestamp();
    j["input"] = {{"path", edf_path}, {"sha256", sha256_file_hex(edf_path)}};
    if (!annotations_path.empty())
        j["annotations"] = {{"path", annotations_path},
                            {"sha256", sha256_file_hex(annotations_path)}};
    j["prompt_versions"] = {kGeneratePromptVersion, kVerifyPromptVersion};
    j["config"] = config.echo();
    j["warnings"] = warnings;
    return j.dump(2) + "\n";
}

struct PdrPredictor {
    std::vector<PdrNetwork> models;

    explicit PdrPredictor(const std::vector<std::string>& paths) {
        for (const auto& p : paths) models.push_back(PdrNetwork::load(p));
    }
    double predict(const PdrFeatureMap& map) {
        if (models.empty()) return spectral_peak_baseline(map);
        return ensemble_predict_hz(models, map);
    }
};

}  // namespace

AnalyzeResult run_analyze(const std::string& edf_path, const PipelineConfig& config,
                          const AnalyzeOptions& options) {
    AnalyzeResult result;
    result.recording_id =
        options.recording_id.empty() ? default_recording_id(edf_path) : options.recording_id;
    const auto& montage = MontageMap::standard19();

    Recording raw = load_edf(edf_path);

    std::string annotations_path = options.annotations_path;
    if (annotations_path.empty()) {
        fs::path sidecar = fs::path(edf_path).replace_extension(".txt");
        if (fs::exists(sidecar)) annotations_path = sidecar.string();
    }
    if (!annotations_path.empty()) raw.annotations = load_annotations(annotations_path);
    for (auto& w : annotation_warnings(raw.annotations, raw.duration_s()))
        result.warnings.push_back(w);

    Recording rec = apply_montage(raw, montage);

    std::vector<std::vector<double>> transfer;
    const std::vector<std::vector<double>>* transfer_ptr = nullptr;
    if (config.reference == ReferenceScheme::Rest) {
        transfer = load_transfer_matrix(config.rest_matrix_path, rec.n_channels());
        transfer_ptr = &transfer;
    }
    rec = rereference(rec, config.reference, transfer_ptr);
    if (config.crop_seconds > 0) rec = crop(rec, config.crop_seconds);

    EpochSet es = segment_epochs(rec, config.epoch_len_s);
    if (es.n_epochs() == 0)
        throw DomainError("recording is shorter than one epoch (" +
                          std::to_string(config.epoch_len_s) + " s)");

    auto selection_psds = epoch_psds(es, bands::total.lo, bands::total.hi, config.multitaper);
    result.selection = select_wake_epochs(es, rec.annotations, selection_psds, config.selection);
    es.include_mask = result.selection.include_mask;
    if (es.n_included() == 0)
        throw DomainError("no epochs survived awake eyes-closed selection");
    if (es.n_included() < 10)
        result.warnings.push_back("only " + std::to_string(es.n_included()) +
                                  " epochs survived selection; EEG quality stamped Poor");

    result.artifact_mask = detect_artifacts(es, montage, config.artifact);
    if (!result.artifact_mask.warning.empty())
        result.warnings.push_back(result.artifact_mask.warning);

    // Usable entries for spectral averaging: after repair everything except
    // unrepairable entries; without repair everything not contaminated.
    std::vector<std::vector<std::uint8_t>> usable(es.n_epochs(),
                                                  std::vector<std::uint8_t>(es.n_channels(), 1));
    if (config.repair && !result.artifact_mask.detection_skipped) {
        auto repaired = repair_artifacts(es, result.artifact_mask, montage);
        es = std::move(repaired.epochs);
        for (std::size_t e = 0; e < es.n_epochs(); ++e)
            for (std::size_t c = 0; c < es.n_channels(); ++c)
                usable[e][c] = !repaired.unrepaired[e][c];
    } else if (!result.artifact_mask.detection_skipped) {
        for (std::size_t e = 0; e < es.n_epochs(); ++e)
            for (std::size_t c = 0; c < es.n_channels(); ++c)
                usable[e][c] = !result.artifact_mask.contaminated[e][c];
    }

    auto feature_psds = epoch_psds(es, bands::total.lo, bands::total.hi, config.multitaper);
    auto pdr_psds = epoch_psds(es, kPdrMapFminHz,
                               kPdrMapFminHz + 0.25 * (kPdrMapCols - 1), config.multitaper);
    PsdTable feature_mean = mean_psd(feature_psds, es.include_mask, &usable);
    PsdTable pdr_mean = mean_psd(pdr_psds, es.include_mask, &usable);

    result.features = compute_background_features(feature_mean, feature_psds, es.include_mask,
                                                  montage, &usable);
    result.features.bad_channels = result.artifact_mask.bad_channels;

    PdrPredictor predictor(config.pdr_model_paths);
    auto left_map = build_feature_map(pdr_mean, Side::Left);
    auto right_map = build_feature_map(pdr_mean, Side::Right);
    result.features.pdr_left_hz = predictor.predict(left_map);
    result.features.pdr_right_hz = predictor.predict(right_map);

    result.findings = classify_background(result.features, montage, config.thresholds);
    result.report_features = build_feature_json(result.findings, result.features, montage);

    fs::create_directories(config.output_dir);
    const fs::path out_dir(config.output_dir);
    result.features_path = (out_dir / (result.recording_id + ".features.json")).string();
    atomic_write_file(result.features_path, result.report_features.to_json());

    if (config.export_psd_csv)
        write_psd_csv(feature_mean, (out_dir / (result.recording_id + ".psd.csv")).string());
    if (config.export_mask_csv)
        write_mask_csv(result.artifact_mask, es.channels,
                       (out_dir / (result.recording_id + ".mask.csv")).string());

    result.run_meta_path = (out_dir / (result.recording_id + ".run.json")).string();
    atomic_write_file(result.run_meta_path,
                      run_meta_json(result.recording_id, edf_path, annotations_path, config,
                                    result.warnings));

    if (options.no_llm) return result;

    // Build HTTP clients from config unless the caller injected test doubles.
    std::vector<std::unique_ptr<LlmClient>> owned;
    LlmClient* generator = options.clients.generator;
    std::vector<LlmClient*> verifiers = options.clients.verifiers;
    if (!generator) {
        auto it = config.providers.find(config.generator_provider);
        if (it == config.providers.end())
            throw ConfigError("llm.generator provider '" + config.generator_provider +
                              "' is not configured");
        owned.push_back(std::make_unique<HttpLlmClient>(it->second));
        generator = owned.back().get();
    }
    if (verifiers.empty()) {
        for (const auto& name : config.verifier_providers) {
            auto it = config.providers.find(name);
            if (it == config.providers.end())
                throw ConfigError("llm.verifiers provider '" + name + "' is not configured");
            owned.push_back(std::make_unique<HttpLlmClient>(it->second));
            verifiers.push_back(owned.back().get());
        }
    }

    LlmThrottle throttle(config.llm_max_inflight);
    throttle.acquire();
    GeneratedReport report = [&] {
        struct Release {
            LlmThrottle* t;
            ~Release() { t->release(); }
        } release{&throttle};
        return generate_report(*generator, result.report_features);
    }();
    result.report = report;
    result.report_path = (out_dir / (result.recording_id + ".report.txt")).string();
    atomic_write_file(result.report_path, report.text);

    result.verification = verify_report(report, verifiers, {}, &throttle);
    result.verify_path = (out_dir / (result.recording_id + ".verify.json")).string();
    atomic_write_file(result.verify_path, verification_to_json(*result.verification, report));
    return result;
}

int run_batch(const std::vector<std::string>& edf_paths, const PipelineConfig& config,
              const AnalyzeOptions& options, int workers) {
    if (workers < 1) workers = 1;
    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    std::mutex log_mu;

    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= edf_paths.size()) return;
            const auto& path = edf_paths[i];
            try {
                AnalyzeOptions per = options;
                per.recording_id = default_recording_id(path);
                run_analyze(path, config, per);
            } catch (const std::exception& e) {
                ++failures;
                const std::string id = default_recording_id(path);
                {
                    std::scoped_lock lock(log_mu);
                    std::cerr << "batch: " << path << " failed: " << e.what() << "\n";
                }
                try {
                    ordered_json err;
                    err["recording_id"] = id;
                    err["input"] = path;
                    err["error"] = e.what();
                    fs::create_directories(config.output_dir);
                    atomic_write_file(
                        (fs::path(config.output_dir) / (id + ".error.json")).string(),
                        err.dump(2) + "\n");
                } catch (...) {
                    // the stderr line above is the fallback record
                }
            }
        }
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return failures.load();
}

}  // namespace eegbg
