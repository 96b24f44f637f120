#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eegbg/config.hpp"
#include "eegbg/errors.hpp"
#include "eegbg/pdr_train.hpp"
#include "eegbg/pipeline.hpp"
#include "eegbg/report.hpp"
#include "eegbg/stats.hpp"
#include "eegbg/util.hpp"
#include "eegbg/version.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace eegbg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitPipelineError = 2;

void print_error_json(const std::string& type, const std::string& what) {
    ordered_json j;
    j["error"] = what;
    j["type"] = type;
    std::cerr << j.dump() << "\n";
}

PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return PipelineConfig{};
    return PipelineConfig::from_file(path);
}

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    std::istringstream is(csv);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw ConfigError("no seeds given");
    return seeds;
}

ordered_json metrics_json(const PdrMetrics& m) {
    return ordered_json{{"mae", m.mae},     {"rmse", m.rmse},   {"r2", m.r2},
                        {"acc06", m.acc06}, {"acc12", m.acc12}};
}

ordered_json metrics_json(const ClassificationMetrics& m) {
    return ordered_json{{"f1", m.f1},
                        {"precision", m.precision},
                        {"recall", m.recall},
                        {"accuracy", m.accuracy},
                        {"degenerate", m.degenerate}};
}

void print_metrics_table(const ClassificationMetrics& m) {
    std::printf("%-10s %8.3f\n", "f1", m.f1);
    std::printf("%-10s %8.3f\n", "precision", m.precision);
    std::printf("%-10s %8.3f\n", "recall", m.recall);
    std::printf("%-10s %8.3f\n", "accuracy", m.accuracy);
}

std::vector<int> read_binary_column(const std::string& path, int column) {
    std::vector<int> values;
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.find_first_not_of("predlabl, \r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string cell;
        int idx = 0, value = -1;
        while (std::getline(ls, cell, ',')) {
            if (idx == column) {
                try {
                    value = std::stoi(cell);
                } catch (const std::exception&) {
                    throw ParseError(path + " line " + std::to_string(lineno) +
                                     ": expected 0/1, got \"" + cell + "\"");
                }
            }
            ++idx;
        }
        if (value < 0)
            throw ParseError(path + " line " + std::to_string(lineno) + ": missing column " +
                             std::to_string(column));
        values.push_back(value);
    }
    return values;
}

// Trains one seed and evaluates on the held-out indices.
struct SeedOutcome {
    std::uint64_t seed;
    std::string model_path;
    PdrMetrics test_metrics;
    double final_loss;
};

SeedOutcome train_one_seed(const std::vector<LabeledExample>& dataset,
                           const GroupedSplit& split, TrainConfig cfg,
                           const std::string& out_dir) {
    std::vector<LabeledExample> train_set;
    for (auto i : split.train) train_set.push_back(dataset[i]);
    auto result = train(train_set, cfg);

    std::vector<double> preds, labels;
    for (auto i : split.test) {
        preds.push_back(predict_hz(result.network, dataset[i].features));
        labels.push_back(dataset[i].label_hz);
    }

    SeedOutcome out;
    out.seed = cfg.seed;
    out.test_metrics = pdr_metrics(preds, labels);
    out.final_loss = result.final_loss;
    fs::create_directories(out_dir);
    out.model_path =
        (fs::path(out_dir) / ("pdr_seed" + std::to_string(cfg.seed) + ".pdrm")).string();
    ordered_json echo{{"epochs", cfg.epochs}, {"batch", cfg.batch_size},
                      {"lr", cfg.learning_rate}, {"seed", cfg.seed}};
    result.network.save(out.model_path, echo.dump());
    return out;
}

int cmd_analyze(const std::vector<std::string>& paths, const std::string& config_path,
                const std::string& annotations, const std::string& out_dir, bool no_llm,
                bool no_repair, double crop_seconds, const std::string& pdr_models,
                bool psd_csv, bool mask_csv, int workers, bool batch) {
    PipelineConfig config = load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (no_repair) config.repair = false;
    if (crop_seconds > 0) config.crop_seconds = crop_seconds;
    if (!pdr_models.empty()) config.apply_line("pdr.models", pdr_models);
    config.export_psd_csv = psd_csv;
    config.export_mask_csv = mask_csv;

    AnalyzeOptions options;
    options.no_llm = no_llm;
    options.annotations_path = annotations;

    if (batch) {
        int failures = run_batch(paths, config, options, workers);
        return failures == 0 ? kExitOk : kExitPipelineError;
    }
    auto result = run_analyze(paths.front(), config, options);
    std::cout << "wrote " << result.features_path << "\n";
    if (!result.report_path.empty()) std::cout << "wrote " << result.report_path << "\n";
    if (!result.verify_path.empty()) std::cout << "wrote " << result.verify_path << "\n";
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    return kExitOk;
}

int cmd_train_pdr(const std::string& manifest, const std::string& out_dir,
                  const std::string& seeds_csv, int epochs, int batch, double lr,
                  double train_frac, std::uint64_t split_seed, int ensemble_size) {
    auto dataset = load_manifest(manifest);
    if (dataset.empty()) throw DomainError("train-pdr: manifest is empty");
    auto seeds = parse_seeds(seeds_csv);
    auto split = split_grouped(dataset, train_frac, split_seed);

    std::vector<SeedOutcome> outcomes;
    for (auto seed : seeds) {
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.batch_size = batch;
        cfg.learning_rate = lr;
        cfg.seed = seed;
        outcomes.push_back(train_one_seed(dataset, split, cfg, out_dir));
        std::cout << "seed " << seed << ": test MAE " << outcomes.back().test_metrics.mae
                  << ", final loss " << outcomes.back().final_loss << "\n";
    }

    // Best-MAE checkpoints form the ensemble.
    std::vector<std::size_t> order(outcomes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return outcomes[a].test_metrics.mae < outcomes[b].test_metrics.mae;
    });
    const std::size_t take = std::min<std::size_t>(
        order.size(), ensemble_size > 0 ? static_cast<std::size_t>(ensemble_size) : 3);

    std::vector<PdrNetwork> members;
    ordered_json ensemble;
    ensemble["members"] = ordered_json::array();
    for (std::size_t k = 0; k < take; ++k) {
        const auto& o = outcomes[order[k]];
        ensemble["members"].push_back(fs::path(o.model_path).filename().string());
        members.push_back(PdrNetwork::load(o.model_path));
    }

    std::vector<double> preds, labels;
    for (auto i : split.test) {
        preds.push_back(ensemble_predict_hz(members, dataset[i].features));
        labels.push_back(dataset[i].label_hz);
    }
    ensemble["ensemble_metrics"] = metrics_json(pdr_metrics(preds, labels));
    ordered_json per_seed = ordered_json::array();
    for (const auto& o : outcomes) {
        ordered_json j;
        j["seed"] = o.seed;
        j["model"] = fs::path(o.model_path).filename().string();
        j["metrics"] = metrics_json(o.test_metrics);
        j["final_loss"] = o.final_loss;
        per_seed.push_back(j);
    }
    ensemble["per_seed"] = per_seed;
    ensemble["split"] = {{"train_frac", train_frac},
                         {"seed", split_seed},
                         {"train_examples", split.train.size()},
                         {"test_examples", split.test.size()}};

    atomic_write_file((fs::path(out_dir) / "ensemble.json").string(), ensemble.dump(2) + "\n");
    atomic_write_file((fs::path(out_dir) / "metrics.json").string(),
                      ensemble.dump(2) + "\n");
    std::cout << "ensemble MAE " << ensemble["ensemble_metrics"]["mae"] << " -> " << out_dir
              << "/ensemble.json\n";
    return kExitOk;
}

int cmd_eval_pdr(const std::string& manifest, int kfold, int epochs, int batch, double lr,
                 std::uint64_t seed, const std::string& json_out) {
    auto dataset = load_manifest(manifest);
    auto folds = kfold_grouped(dataset, kfold, seed);

    ordered_json out;
    out["k"] = kfold;
    out["folds"] = ordered_json::array();
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<LabeledExample> train_set;
        for (std::size_t g = 0; g < folds.size(); ++g) {
            if (g == f) continue;
            for (auto i : folds[g]) train_set.push_back(dataset[i]);
        }
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.batch_size = batch;
        cfg.learning_rate = lr;
        cfg.seed = seed + f;
        auto result = train(train_set, cfg);

        std::vector<double> preds, labels;
        for (auto i : folds[f]) {
            preds.push_back(predict_hz(result.network, dataset[i].features));
            labels.push_back(dataset[i].label_hz);
        }
        auto m = pdr_metrics(preds, labels);
        std::printf("fold %zu: MAE %.3f RMSE %.3f R2 %.3f ACC0.6 %.3f ACC1.2 %.3f\n", f, m.mae,
                    m.rmse, m.r2, m.acc06, m.acc12);
        ordered_json fj;
        fj["fold"] = f;
        fj["metrics"] = metrics_json(m);
        out["folds"].push_back(fj);
    }
    if (!json_out.empty()) atomic_write_file(json_out, out.dump(2) + "\n");
    return kExitOk;
}

int cmd_eval(const std::string& matrix_csv, const std::string& pairs_csv,
             const std::string& compare_csv, const std::string& mcnemar_csv,
             const std::string& ztest_csv, const std::string& verify_dir,
             const std::string& json_out) {
    ordered_json out;

    if (!matrix_csv.empty()) {
        auto vals = parse_seeds(matrix_csv);
        if (vals.size() != 4)
            throw ConfigError("--matrix wants 4 counts: m00,m01,m10,m11 ([[tn,fp],[fn,tp]])");
        auto cm = ConfusionMatrix::from_matrix({{{vals[0], vals[1]}, {vals[2], vals[3]}}});
        auto m = classification_metrics(cm);
        print_metrics_table(m);
        out["confusion"] = {{"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}, {"tp", cm.tp}};
        out["metrics"] = metrics_json(m);
    }

    if (!pairs_csv.empty()) {
        auto preds = read_binary_column(pairs_csv, 0);
        auto labels = read_binary_column(pairs_csv, 1);
        auto cm = ConfusionMatrix::from_labels(preds, labels);
        auto m = classification_metrics(cm);
        print_metrics_table(m);
        out["metrics"] = metrics_json(m);
        out["confusion"] = {{"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}, {"tp", cm.tp}};

        if (!compare_csv.empty()) {
            auto preds2 = read_binary_column(compare_csv, 0);
            auto labels2 = read_binary_column(compare_csv, 1);
            if (preds2.size() != preds.size() || labels2 != labels)
                throw DomainError("--compare file must score the same labeled items");
            std::uint64_t b = 0, c = 0;
            for (std::size_t i = 0; i < preds.size(); ++i) {
                bool first_ok = preds[i] == labels[i], second_ok = preds2[i] == labels[i];
                if (first_ok && !second_ok) ++b;
                if (!first_ok && second_ok) ++c;
            }
            double p = mcnemar(b, c);
            std::printf("%-10s %8.4f  (b=%llu c=%llu)\n", "mcnemar_p", p,
                        static_cast<unsigned long long>(b), static_cast<unsigned long long>(c));
            out["mcnemar"] = {{"b", b}, {"c", c}, {"p", p}};
        }
    }

    if (!mcnemar_csv.empty()) {
        auto vals = parse_seeds(mcnemar_csv);
        if (vals.size() != 2) throw ConfigError("--mcnemar wants b,c");
        double p = mcnemar(vals[0], vals[1]);
        std::printf("%-10s %8.5f\n", "mcnemar_p", p);
        out["mcnemar"] = {{"b", vals[0]}, {"c", vals[1]}, {"p", p}};
    }

    if (!ztest_csv.empty()) {
        auto vals = parse_seeds(ztest_csv);
        if (vals.size() != 4) throw ConfigError("--ztest wants k1,n1,k2,n2");
        double p = two_proportion_ztest(vals[0], vals[1], vals[2], vals[3]);
        std::printf("%-10s %8.5f\n", "ztest_p", p);
        out["ztest"] = {{"k1", vals[0]}, {"n1", vals[1]}, {"k2", vals[2]}, {"n2", vals[3]},
                        {"p", p}};
    }

    if (!verify_dir.empty()) {
        std::vector<std::vector<int>> gbs, focal;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(verify_dir)) {
            if (entry.path().string().ends_with(".verify.json")) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            auto j = ordered_json::parse(read_file(file.string()));
            std::vector<int> g, f;
            for (const auto& vote : j.at("votes")) {
                if (vote.at("vote").is_null()) continue;
                g.push_back(vote.at("vote").at(0).get<int>());
                f.push_back(vote.at("vote").at(1).get<int>());
            }
            if (g.size() >= 2) {
                gbs.push_back(g);
                focal.push_back(f);
            }
        }
        if (gbs.empty()) throw DomainError("no usable verify.json files in " + verify_dir);
        auto a_g = gwet_ac1(gbs);
        auto a_f = gwet_ac1(focal);
        std::printf("%-12s %6.3f  (95%% CI %.3f-%.3f, n=%zu)\n", "AC1 gbs", a_g.ac1, a_g.ci_low,
                    a_g.ci_high, gbs.size());
        std::printf("%-12s %6.3f  (95%% CI %.3f-%.3f, n=%zu)\n", "AC1 focal", a_f.ac1,
                    a_f.ci_low, a_f.ci_high, focal.size());
        out["ac1"] = {{"gbs", {{"value", a_g.ac1}, {"ci", {a_g.ci_low, a_g.ci_high}}}},
                      {"focal", {{"value", a_f.ac1}, {"ci", {a_f.ci_low, a_f.ci_high}}}},
                      {"items", gbs.size()}};
    }

    if (out.empty())
        throw ConfigError("eval: nothing to do; pass --matrix, --pairs, --mcnemar, --ztest or "
                          "--verify-dir");
    if (!json_out.empty()) atomic_write_file(json_out, out.dump(2) + "\n");
    return kExitOk;
}

int cmd_report(const std::string& features_path, const std::string& config_path,
               const std::string& out_dir) {
    PipelineConfig config = load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    auto rf = ReportFeatures::from_json(read_file(features_path));

    auto it = config.providers.find(config.generator_provider);
    if (it == config.providers.end())
        throw ConfigError("llm.generator provider '" + config.generator_provider +
                          "' is not configured");
    HttpLlmClient client(it->second);
    auto report = generate_report(client, rf);

    fs::create_directories(config.output_dir);
    std::string id = fs::path(features_path).stem().stem().string();
    std::string path = (fs::path(config.output_dir) / (id + ".report.txt")).string();
    atomic_write_file(path, report.text);
    std::cout << "wrote " << path << "\n";
    return kExitOk;
}

int cmd_verify(const std::string& report_path, const std::string& config_path,
               const std::string& out_dir) {
    PipelineConfig config = load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;

    GeneratedReport report;
    report.text = read_file(report_path);
    report.model_id = "external";
    report.timestamp = utc_timestamp();
    report.prompt_hash = sha256_hex(report.text);

    std::vector<std::unique_ptr<LlmClient>> owned;
    std::vector<LlmClient*> verifiers;
    for (const auto& name : config.verifier_providers) {
        auto it = config.providers.find(name);
        if (it == config.providers.end())
            throw ConfigError("llm.verifiers provider '" + name + "' is not configured");
        owned.push_back(std::make_unique<HttpLlmClient>(it->second));
        verifiers.push_back(owned.back().get());
    }
    LlmThrottle throttle(config.llm_max_inflight);
    auto vr = verify_report(report, verifiers, {}, &throttle);

    fs::create_directories(config.output_dir);
    std::string id = fs::path(report_path).stem().stem().string();
    std::string path = (fs::path(config.output_dir) / (id + ".verify.json")).string();
    atomic_write_file(path, verification_to_json(vr, report));
    std::cout << "majority [" << vr.majority[0] << ", " << vr.majority[1] << "] -> " << path
              << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EEG background analysis and report generation"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, annotations, out_dir, pdr_models;
    bool no_llm = false, no_repair = false, psd_csv = false, mask_csv = false;
    double crop_seconds = 0;
    int workers = 2;

    auto add_pipeline_flags = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key = value config file");
        cmd->add_option("--annotations", annotations, "annotation sidecar path");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_flag("--no-llm", no_llm, "stop after features.json (no network access)");
        cmd->add_flag("--no-repair", no_repair, "detect artifacts but skip signal repair");
        cmd->add_option("--crop-seconds", crop_seconds, "crop recordings to the first N seconds");
        cmd->add_option("--pdr-models", pdr_models, "comma-separated PDR model files");
        cmd->add_flag("--psd-csv", psd_csv, "export the recording PSD as CSV");
        cmd->add_flag("--mask-csv", mask_csv, "export the artifact mask as CSV");
    };

    std::vector<std::string> edf_paths;
    auto* analyze = app.add_subcommand("analyze", "analyze one EDF recording");
    analyze->add_option("edf", edf_paths, "EDF file")->required()->expected(1);
    add_pipeline_flags(analyze);

    auto* batch = app.add_subcommand("batch", "analyze many EDF recordings");
    batch->add_option("edf", edf_paths, "EDF files")->required()->expected(-1);
    batch->add_option("--workers", workers, "worker pool width");
    add_pipeline_flags(batch);

    std::string manifest, seeds = "1,2,3", json_out;
    int epochs = 200, batch_size = 16, kfold = 4, ensemble_size = 3;
    double lr = 1e-3, train_frac = 0.7;
    std::uint64_t split_seed = 0;

    auto* train_cmd = app.add_subcommand("train-pdr", "train PDR regression models");
    train_cmd->add_option("--manifest", manifest, "dataset manifest CSV")->required();
    train_cmd->add_option("--out", out_dir, "model output directory")->required();
    train_cmd->add_option("--seeds", seeds, "comma-separated training seeds");
    train_cmd->add_option("--epochs", epochs, "training epochs");
    train_cmd->add_option("--batch", batch_size, "batch size");
    train_cmd->add_option("--lr", lr, "Adam learning rate");
    train_cmd->add_option("--train-frac", train_frac, "grouped train fraction");
    train_cmd->add_option("--split-seed", split_seed, "grouped split seed");
    train_cmd->add_option("--ensemble-size", ensemble_size, "best-MAE members to keep");

    auto* eval_pdr = app.add_subcommand("eval-pdr", "k-fold cross-validation for PDR models");
    eval_pdr->add_option("--manifest", manifest, "dataset manifest CSV")->required();
    eval_pdr->add_option("--kfold", kfold, "number of folds");
    eval_pdr->add_option("--epochs", epochs, "training epochs");
    eval_pdr->add_option("--batch", batch_size, "batch size");
    eval_pdr->add_option("--lr", lr, "Adam learning rate");
    eval_pdr->add_option("--seed", split_seed, "fold assignment / training seed");
    eval_pdr->add_option("--json", json_out, "write metrics JSON here");

    std::string matrix_csv, pairs_csv, compare_csv, mcnemar_csv, ztest_csv, verify_dir;
    auto* eval_cmd = app.add_subcommand("eval", "classification metrics and statistics");
    eval_cmd->add_option("--matrix", matrix_csv, "confusion matrix m00,m01,m10,m11");
    eval_cmd->add_option("--pairs", pairs_csv, "CSV of pred,label rows");
    eval_cmd->add_option("--compare", compare_csv, "second pred,label CSV for McNemar");
    eval_cmd->add_option("--mcnemar", mcnemar_csv, "discordant counts b,c");
    eval_cmd->add_option("--ztest", ztest_csv, "two proportions k1,n1,k2,n2");
    eval_cmd->add_option("--verify-dir", verify_dir, "directory of *.verify.json for AC1");
    eval_cmd->add_option("--json", json_out, "write results JSON here");

    std::string features_path, report_path;
    auto* report_cmd = app.add_subcommand("report", "generate a narrative report from features");
    report_cmd->add_option("--features", features_path, "features.json path")->required();
    report_cmd->add_option("--config", config_path, "config file with LLM providers")->required();
    report_cmd->add_option("--out", out_dir, "output directory");

    auto* verify_cmd = app.add_subcommand("verify", "verify a report with 3 LLM verifiers");
    verify_cmd->add_option("--report", report_path, "report.txt path")->required();
    verify_cmd->add_option("--config", config_path, "config file with LLM providers")->required();
    verify_cmd->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed())
            return cmd_analyze(edf_paths, config_path, annotations, out_dir, no_llm, no_repair,
                               crop_seconds, pdr_models, psd_csv, mask_csv, workers, false);
        if (batch->parsed())
            return cmd_analyze(edf_paths, config_path, annotations, out_dir, no_llm, no_repair,
                               crop_seconds, pdr_models, psd_csv, mask_csv, workers, true);
        if (train_cmd->parsed())
            return cmd_train_pdr(manifest, out_dir, seeds, epochs, batch_size, lr, train_frac,
                                 split_seed, ensemble_size);
        if (eval_pdr->parsed())
            return cmd_eval_pdr(manifest, kfold, epochs, batch_size, lr, split_seed, json_out);
        if (eval_cmd->parsed())
            return cmd_eval(matrix_csv, pairs_csv, compare_csv, mcnemar_csv, ztest_csv,
                            verify_dir, json_out);
        if (report_cmd->parsed()) return cmd_report(features_path, config_path, out_dir);
        if (verify_cmd->parsed()) return cmd_verify(report_path, config_path, out_dir);
    } catch (const ParseError& e) {
        print_error_json("parse", e.what());
        return kExitInputError;
    } catch (const ConfigError& e) {
        print_error_json("config", e.what());
        return kExitInputError;
    } catch (const CalibrationError& e) {
        print_error_json("calibration", e.what());
        return kExitInputError;
    } catch (const TransportError& e) {
        print_error_json("transport", e.what());
        return kExitPipelineError;
    } catch (const std::exception& e) {
        print_error_json("pipeline", e.what());
        return kExitPipelineError;
    }
    return kExitOk;
}
