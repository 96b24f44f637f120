#include "eegbg/pdr_train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "eegbg/errors.hpp"

namespace eegbg {

namespace {

constexpr std::uint64_t kShuffleSeedSalt = 0x9E3779B97F4A7C15ull;

// Fisher-Yates with our own uniform draw so shuffles are identical across
// standard library implementations.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_unit(rng) * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(v[i - 1], v[j]);
    }
}

struct Group {
    std::string key;
    std::vector<std::size_t> examples;
    double mean_label = 0;
};

std::vector<Group> collect_groups(const std::vector<LabeledExample>& dataset) {
    std::map<std::string, Group> by_key;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].group_key.empty())
            throw DomainError("grouped split: example " + std::to_string(i) +
                              " has an empty group key");
        auto& g = by_key[dataset[i].group_key];
        g.key = dataset[i].group_key;
        g.examples.push_back(i);
    }
    std::vector<Group> groups;
    for (auto& [key, g] : by_key) {
        double acc = 0;
        for (auto i : g.examples) acc += dataset[i].label_hz;
        g.mean_label = acc / static_cast<double>(g.examples.size());
        groups.push_back(std::move(g));
    }
    return groups;  // ordered by key (map iteration), deterministic
}

// Buckets groups into 0.5 Hz label bins and shuffles within each bin.
std::vector<std::vector<Group>> binned_groups(std::vector<Group> groups, std::mt19937_64& rng) {
    std::map<int, std::vector<Group>> bins;
    for (auto& g : groups) {
        int bin = static_cast<int>(std::lround((g.mean_label - kPdrLabelMinHz) / 0.5));
        bins[bin].push_back(std::move(g));
    }
    std::vector<std::vector<Group>> out;
    for (auto& [bin, gs] : bins) {
        deterministic_shuffle(gs, rng);
        out.push_back(std::move(gs));
    }
    return out;
}

}  // namespace

AdamOptimizer::AdamOptimizer(std::vector<ParamView> params, double lr, double beta1,
                             double beta2, double epsilon)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
    for (const auto& p : params_) {
        m_.emplace_back(static_cast<std::size_t>(p.size), 0.0);
        v_.emplace_back(static_cast<std::size_t>(p.size), 0.0);
    }
}

void AdamOptimizer::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto& p = params_[k];
        auto& m = m_[k];
        auto& v = v_[k];
        for (Eigen::Index i = 0; i < p.size; ++i) {
            const double g = p.grad[i];
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

TrainResult train(const std::vector<LabeledExample>& dataset, const TrainConfig& cfg) {
    if (dataset.empty()) throw DomainError("train: empty dataset");
    if (cfg.batch_size < 1) throw DomainError("train: batch size must be positive");

    std::vector<double> labels_unit(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        labels_unit[i] = normalize_label(dataset[i].label_hz);

    TrainResult result;
    result.network = PdrNetwork::build(cfg.spec, cfg.seed);
    AdamOptimizer opt(result.network.params(), cfg.learning_rate, cfg.beta1, cfg.beta2,
                      cfg.adam_epsilon);
    std::mt19937_64 shuffle_rng(cfg.seed ^ kShuffleSeedSalt);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        deterministic_shuffle(order, shuffle_rng);
        double epoch_loss = 0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<const PdrFeatureMap*> maps;
            Eigen::VectorXd targets(static_cast<Eigen::Index>(end - start));
            for (std::size_t i = start; i < end; ++i) {
                maps.push_back(&dataset[order[i]].features);
                targets[static_cast<Eigen::Index>(i - start)] = labels_unit[order[i]];
            }
            auto x = PdrNetwork::to_batch(maps);
            result.network.zero_grads();
            Eigen::VectorXd out = result.network.forward(x, true);
            Eigen::VectorXd diff = out - targets;
            const double loss = diff.squaredNorm() / static_cast<double>(diff.size());
            if (!std::isfinite(loss))
                throw DomainError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                  ", batch " + std::to_string(n_batches) + " (loss=" +
                                  std::to_string(loss) + ")");
            result.network.backward(2.0 * diff / static_cast<double>(diff.size()));
            opt.step();
            epoch_loss += loss;
            ++n_batches;
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(n_batches));
    }
    result.epochs_run = cfg.epochs;
    result.final_loss = result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back();
    return result;
}

GroupedSplit split_grouped(const std::vector<LabeledExample>& dataset, double train_frac,
                           std::uint64_t seed) {
    if (train_frac <= 0.0 || train_frac >= 1.0)
        throw DomainError("split_grouped: train fraction must be in (0, 1)");
    std::mt19937_64 rng(seed);
    auto bins = binned_groups(collect_groups(dataset), rng);

    GroupedSplit split;
    // Alternate the rounding direction across bins so small bins do not all
    // round the same way.
    bool round_up = false;
    for (auto& bin : bins) {
        double want = train_frac * static_cast<double>(bin.size());
        std::size_t n_train = round_up ? static_cast<std::size_t>(std::ceil(want))
                                       : static_cast<std::size_t>(std::floor(want));
        n_train = std::min(n_train, bin.size());
        if (bin.size() > 1) {
            n_train = std::max<std::size_t>(n_train, 1);
            n_train = std::min(n_train, bin.size() - 1);
        }
        round_up = !round_up;
        for (std::size_t g = 0; g < bin.size(); ++g) {
            auto& dst = g < n_train ? split.train : split.test;
            for (auto i : bin[g].examples) dst.push_back(i);
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<std::vector<std::size_t>> kfold_grouped(const std::vector<LabeledExample>& dataset,
                                                    int k, std::uint64_t seed) {
    if (k < 2) throw DomainError("kfold_grouped: k must be at least 2");
    auto groups = collect_groups(dataset);
    if (static_cast<std::size_t>(k) > groups.size())
        throw DomainError("kfold_grouped: k=" + std::to_string(k) + " exceeds the " +
                          std::to_string(groups.size()) + " distinct groups");
    std::mt19937_64 rng(seed);
    auto bins = binned_groups(std::move(groups), rng);

    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    std::size_t next = 0;
    for (auto& bin : bins) {
        for (auto& g : bin) {
            for (auto i : g.examples) folds[next].push_back(i);
            next = (next + 1) % folds.size();
        }
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

PdrMetrics pdr_metrics(const std::vector<double>& pred_hz, const std::vector<double>& label_hz) {
    if (pred_hz.size() != label_hz.size())
        throw DomainError("pdr_metrics: prediction/label length mismatch");
    if (pred_hz.empty()) throw DomainError("pdr_metrics: empty input");

    const double n = static_cast<double>(pred_hz.size());
    double abs_sum = 0, sq_sum = 0, label_mean = 0;
    std::size_t ok06 = 0, ok12 = 0;
    for (std::size_t i = 0; i < pred_hz.size(); ++i) {
        double err = pred_hz[i] - label_hz[i];
        abs_sum += std::abs(err);
        sq_sum += err * err;
        label_mean += label_hz[i];
        if (std::abs(err) < 0.6) ++ok06;
        if (std::abs(err) < 1.2) ++ok12;
    }
    label_mean /= n;
    double ss_tot = 0;
    for (double l : label_hz) ss_tot += (l - label_mean) * (l - label_mean);

    PdrMetrics m;
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sq_sum / n);
    m.r2 = ss_tot > 0 ? 1.0 - sq_sum / ss_tot : (sq_sum == 0 ? 1.0 : 0.0);
    m.acc06 = static_cast<double>(ok06) / n;
    m.acc12 = static_cast<double>(ok12) / n;
    return m;
}

std::vector<LabeledExample> load_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ParseError("cannot open manifest: " + manifest_path);
    const auto base = std::filesystem::path(manifest_path).parent_path();

    std::vector<LabeledExample> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("file_id", 0) == 0) continue;  // header
        std::istringstream ls(line);
        std::string file_id, side, label, path;
        if (!std::getline(ls, file_id, ',') || !std::getline(ls, side, ',') ||
            !std::getline(ls, label, ',') || !std::getline(ls, path))
            throw ParseError("manifest " + manifest_path + " line " + std::to_string(lineno) +
                             ": expected file_id,side,label_hz,feature_path");
        LabeledExample ex;
        ex.group_key = file_id;
        try {
            ex.label_hz = std::stod(label);
        } catch (const std::exception&) {
            throw ParseError("manifest " + manifest_path + " line " + std::to_string(lineno) +
                             ": bad label_hz \"" + label + "\"");
        }
        normalize_label(ex.label_hz);  // range check at load time
        std::filesystem::path p(path);
        ex.features = load_feature_map(p.is_absolute() ? p.string() : (base / p).string());
        if (side != "left" && side != "right")
            throw ParseError("manifest " + manifest_path + " line " + std::to_string(lineno) +
                             ": side must be left or right");
        ex.features.side = side == "left" ? Side::Left : Side::Right;
        out.push_back(std::move(ex));
    }
    return out;
}

void save_manifest(const std::vector<LabeledExample>& dataset, const std::string& manifest_path,
                   const std::string& map_dir) {
    std::filesystem::create_directories(map_dir);
    std::ofstream out(manifest_path);
    if (!out) throw ParseError("cannot open manifest for writing: " + manifest_path);
    out << "file_id,side,label_hz,feature_path\n";
    const auto base = std::filesystem::path(manifest_path).parent_path();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& ex = dataset[i];
        std::string name = ex.group_key + "_" +
                           (ex.features.side == Side::Left ? "left" : "right") + "_" +
                           std::to_string(i) + ".pdrf";
        auto full = std::filesystem::path(map_dir) / name;
        save_feature_map(ex.features, full.string());
        out << ex.group_key << ',' << (ex.features.side == Side::Left ? "left" : "right") << ','
            << ex.label_hz << ',' << std::filesystem::relative(full, base).string() << '\n';
    }
}

}  // namespace eegbg
