#include "eegbg/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "eegbg/errors.hpp"

namespace eegbg {

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

EpochSet segment_epochs(const Recording& rec, double epoch_len_s) {
    if (epoch_len_s <= 0) throw DomainError("segment_epochs: epoch length must be positive");
    double samples_f = epoch_len_s * rec.fs;
    double rounded = std::round(samples_f);
    if (std::abs(samples_f - rounded) > 1e-9)
        throw DomainError("segment_epochs: epoch_len_s * fs is not an integer");
    const std::size_t spe = static_cast<std::size_t>(rounded);

    EpochSet es;
    es.channels = rec.channels;
    es.fs = rec.fs;
    es.epoch_len_s = epoch_len_s;
    const std::size_t n_epochs = spe > 0 ? rec.n_samples() / spe : 0;
    es.epochs.reserve(n_epochs);
    for (std::size_t e = 0; e < n_epochs; ++e) {
        std::vector<std::vector<double>> epoch(rec.n_channels());
        for (std::size_t c = 0; c < rec.n_channels(); ++c) {
            auto begin = rec.data[c].begin() + static_cast<std::ptrdiff_t>(e * spe);
            epoch[c].assign(begin, begin + static_cast<std::ptrdiff_t>(spe));
        }
        es.epochs.push_back(std::move(epoch));
        es.source_offsets_s.push_back(static_cast<double>(e) * epoch_len_s);
    }
    es.include_mask.assign(n_epochs, 1);
    return es;
}

Recording concatenate_epochs(const EpochSet& es, const Recording& source) {
    Recording out;
    out.channels = es.channels;
    out.fs = es.fs;
    out.annotations = source.annotations;
    out.data.assign(es.n_channels(), {});
    for (std::size_t c = 0; c < es.n_channels(); ++c) {
        out.data[c].reserve(es.n_epochs() * es.samples_per_epoch());
        for (std::size_t e = 0; e < es.n_epochs(); ++e)
            out.data[c].insert(out.data[c].end(), es.epochs[e][c].begin(),
                               es.epochs[e][c].end());
    }
    return out;
}

std::vector<std::vector<double>> load_transfer_matrix(const std::string& path,
                                                      std::size_t n_channels) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open transfer matrix file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.size() != n_channels)
        throw DomainError("transfer matrix has " + std::to_string(rows.size()) +
                          " rows, expected " + std::to_string(n_channels));
    for (const auto& r : rows)
        if (r.size() != n_channels)
            throw DomainError("transfer matrix row has " + std::to_string(r.size()) +
                              " columns, expected " + std::to_string(n_channels));
    return rows;
}

Recording rereference(const Recording& rec, ReferenceScheme scheme,
                      const std::vector<std::vector<double>>* transfer) {
    if (scheme == ReferenceScheme::None) return rec;

    Recording out = rec;
    const std::size_t nc = rec.n_channels(), ns = rec.n_samples();
    if (scheme == ReferenceScheme::Average) {
        for (std::size_t s = 0; s < ns; ++s) {
            double mean = 0;
            for (std::size_t c = 0; c < nc; ++c) mean += rec.data[c][s];
            mean /= static_cast<double>(nc);
            for (std::size_t c = 0; c < nc; ++c) out.data[c][s] = rec.data[c][s] - mean;
        }
        return out;
    }

    // REST: data <- G * data.
    if (!transfer) throw DomainError("rereference: REST requires a transfer matrix");
    if (transfer->size() != nc)
        throw DomainError("rereference: transfer matrix dimension " +
                          std::to_string(transfer->size()) + " does not match channel count " +
                          std::to_string(nc));
    for (const auto& row : *transfer)
        if (row.size() != nc)
            throw DomainError("rereference: transfer matrix is not square");
    for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t i = 0; i < nc; ++i) {
            double acc = 0;
            for (std::size_t j = 0; j < nc; ++j) acc += (*transfer)[i][j] * rec.data[j][s];
            out.data[i][s] = acc;
        }
    }
    return out;
}

WakeSelectionResult select_wake_epochs(const EpochSet& es,
                                       const std::vector<Annotation>& annotations,
                                       const std::vector<PsdTable>& per_epoch_psds,
                                       const WakeSelectionConfig& cfg) {
    if (per_epoch_psds.size() != es.n_epochs())
        throw DomainError("select_wake_epochs: need one PSD per epoch");

    WakeSelectionResult res;
    res.include_mask = es.include_mask;
    const std::size_t n = es.n_epochs();

    std::vector<std::string> patterns;
    for (const auto& p : cfg.eye_event_patterns) patterns.push_back(lower(p));

    // Rules (a) and (b) are independent per epoch.
    std::vector<std::uint8_t> survives_ab(n, 0);
    for (std::size_t e = 0; e < n; ++e) {
        if (!res.include_mask[e]) continue;
        const double t0 = es.source_offsets_s[e];
        const double t1 = t0 + es.epoch_len_s;

        bool eye_event = false;
        for (const auto& a : annotations) {
            if (a.onset_s < t0 || a.onset_s >= t1) continue;
            std::string label = lower(a.label);
            for (const auto& p : patterns) {
                if (!p.empty() && label.find(p) != std::string::npos) {
                    eye_event = true;
                    break;
                }
            }
            if (eye_event) break;
        }
        if (eye_event) {
            res.include_mask[e] = 0;
            ++res.excluded_by_annotation;
            continue;
        }

        bool too_large = false;
        for (const auto& ch : es.epochs[e]) {
            for (double v : ch) {
                if (std::abs(v) > cfg.amplitude_limit_uv) {
                    too_large = true;
                    break;
                }
            }
            if (too_large) break;
        }
        if (too_large) {
            res.include_mask[e] = 0;
            ++res.excluded_by_amplitude;
            continue;
        }
        survives_ab[e] = 1;
    }

    // Rule (c): channel-averaged beta and delta power ratios, thresholded at
    // mean + k SD over the epochs surviving (a)/(b). Using post-(a)/(b)
    // statistics keeps artifact epochs from inflating the SD.
    auto epoch_ratio = [&](std::size_t e, Band band) {
        const auto& psd = per_epoch_psds[e];
        double acc = 0;
        for (std::size_t c = 0; c < psd.channels.size(); ++c) {
            double tot = band_power(psd, bands::total, {static_cast<int>(c)});
            acc += tot > 0 ? band_power(psd, band, {static_cast<int>(c)}) / tot : 0.0;
        }
        return acc / static_cast<double>(psd.channels.size());
    };

    std::vector<double> beta_r(n, 0), delta_r(n, 0);
    std::vector<std::size_t> pool;
    for (std::size_t e = 0; e < n; ++e) {
        if (!survives_ab[e]) continue;
        beta_r[e] = epoch_ratio(e, bands::beta);
        delta_r[e] = epoch_ratio(e, bands::delta);
        pool.push_back(e);
    }
    if (pool.empty()) return res;

    auto mean_sd = [&](const std::vector<double>& vals) {
        double mean = 0;
        for (auto e : pool) mean += vals[e];
        mean /= static_cast<double>(pool.size());
        double var = 0;
        for (auto e : pool) var += (vals[e] - mean) * (vals[e] - mean);
        var /= static_cast<double>(pool.size());
        return std::pair{mean, std::sqrt(var)};
    };
    auto [beta_mean, beta_sd] = mean_sd(beta_r);
    auto [delta_mean, delta_sd] = mean_sd(delta_r);
    res.beta_ratio_threshold = beta_mean + cfg.ratio_sd_factor * beta_sd;
    res.delta_ratio_threshold = delta_mean + cfg.ratio_sd_factor * delta_sd;

    // The guard keeps identical-ratio epochs from tripping on the last-ulp
    // difference between a value and the mean of its copies.
    const double guard = 1e-9;
    for (auto e : pool) {
        if (beta_r[e] > res.beta_ratio_threshold + guard ||
            delta_r[e] > res.delta_ratio_threshold + guard) {
            res.include_mask[e] = 0;
            ++res.excluded_by_band_ratio;
        }
    }
    return res;
}

}  // namespace eegbg
