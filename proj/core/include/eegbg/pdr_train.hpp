#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eegbg/pdr_feature_map.hpp"
#include "eegbg/pdr_network.hpp"

namespace eegbg {

struct LabeledExample {
    PdrFeatureMap features;
    double label_hz = 0.0;  // in [4, 12], 0.5 Hz steps in labeled corpora
    std::string group_key;  // source file id; groups never split across partitions
};

struct TrainConfig {
    int epochs = 200;
    int batch_size = 16;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
    PdrNetwork::Spec spec;
};

struct TrainResult {
    PdrNetwork network;
    std::vector<double> epoch_loss;  // mean MSE per epoch
    int epochs_run = 0;
    double final_loss = 0.0;
};

// Adam over the network's parameters.
class AdamOptimizer {
public:
    AdamOptimizer(std::vector<ParamView> params, double lr, double beta1, double beta2,
                  double epsilon);
    void step();

private:
    std::vector<ParamView> params_;
    std::vector<std::vector<double>> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

// Trains on normalized labels with MSE loss. Deterministic for a fixed seed:
// a fixed init scheme, a dedicated shuffle stream, and a dedicated dropout
// stream. Throws DomainError with epoch/batch diagnostics when the loss goes
// non-finite.
TrainResult train(const std::vector<LabeledExample>& dataset, const TrainConfig& cfg);

struct GroupedSplit {
    std::vector<std::size_t> train;  // indices into the dataset
    std::vector<std::size_t> test;
};

// 70/30-style grouped split: no group_key crosses partitions, and groups are
// assigned within 0.5 Hz label bins so the label distribution stays balanced.
GroupedSplit split_grouped(const std::vector<LabeledExample>& dataset, double train_frac,
                           std::uint64_t seed);

// Grouped k-fold: label-binned groups dealt round-robin. Throws when k
// exceeds the number of distinct groups.
std::vector<std::vector<std::size_t>> kfold_grouped(const std::vector<LabeledExample>& dataset,
                                                    int k, std::uint64_t seed);

struct PdrMetrics {
    double mae = 0, rmse = 0, r2 = 0;
    double acc06 = 0;  // fraction with |error| < 0.6 Hz
    double acc12 = 0;  // fraction with |error| < 1.2 Hz
};

PdrMetrics pdr_metrics(const std::vector<double>& pred_hz, const std::vector<double>& label_hz);

// Dataset manifest: CSV `file_id,side,label_hz,feature_path` with a header
// row; feature paths are resolved relative to the manifest's directory.
std::vector<LabeledExample> load_manifest(const std::string& manifest_path);
void save_manifest(const std::vector<LabeledExample>& dataset, const std::string& manifest_path,
                   const std::string& map_dir);

}  // namespace eegbg
