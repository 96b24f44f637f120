#include "eegbg/artifact.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "eegbg/errors.hpp"

namespace eegbg {

namespace {

double percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw DomainError("percentile: empty sample");
    std::sort(values.begin(), values.end());
    double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
    double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

const std::array<const char*, kEpochChannelFeatureCount>& epoch_channel_feature_names() {
    static const std::array<const char*, kEpochChannelFeatureCount> names = {
        "mean", "variance", "sd", "skewness", "excess_kurtosis", "min", "max",
        "peak_to_peak", "rms", "median", "mad", "line_length", "zero_crossings",
        "hjorth_activity", "hjorth_mobility", "hjorth_complexity", "diff1_rms",
        "diff2_rms", "lag1_autocorr", "power_delta", "power_theta", "power_alpha",
        "power_beta", "power_total", "rel_delta", "rel_theta", "rel_alpha", "rel_beta",
        "spectral_entropy", "sef95", "peak_freq"};
    return names;
}

std::vector<double> extract_features(const std::vector<double>& samples, double fs) {
    const std::size_t n = samples.size();
    if (n < 4) throw DomainError("extract_features: too few samples");
    for (double v : samples)
        if (!std::isfinite(v)) throw DomainError("extract_features: non-finite sample");

    std::vector<double> f;
    f.reserve(kEpochChannelFeatureCount);

    double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double var = 0, m3 = 0, m4 = 0;
    for (double v : samples) {
        double d = v - mean;
        var += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    var /= n;
    m3 /= n;
    m4 /= n;
    double sd = std::sqrt(var);
    double skew = var > 0 ? m3 / (sd * sd * sd) : 0.0;
    double kurt = var > 0 ? m4 / (var * var) - 3.0 : 0.0;
    auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
    double mn = *mn_it, mx = *mx_it;
    double rms = 0;
    for (double v : samples) rms += v * v;
    rms = std::sqrt(rms / n);

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    std::vector<double> absdev(n);
    for (std::size_t i = 0; i < n; ++i) absdev[i] = std::abs(samples[i] - median);
    double mad = median_of(absdev);

    double line_length = 0;
    std::size_t zero_crossings = 0;
    for (std::size_t i = 1; i < n; ++i) {
        line_length += std::abs(samples[i] - samples[i - 1]);
        if (samples[i - 1] * samples[i] < 0) ++zero_crossings;
    }

    // Hjorth parameters from first/second differences.
    double var_d1 = 0, var_d2 = 0, d1_mean = 0, d2_mean = 0;
    std::vector<double> d1(n - 1), d2(n - 2);
    for (std::size_t i = 0; i + 1 < n; ++i) d1[i] = samples[i + 1] - samples[i];
    for (std::size_t i = 0; i + 1 < d1.size(); ++i) d2[i] = d1[i + 1] - d1[i];
    for (double v : d1) d1_mean += v;
    d1_mean /= static_cast<double>(d1.size());
    for (double v : d2) d2_mean += v;
    d2_mean /= static_cast<double>(d2.size());
    for (double v : d1) var_d1 += (v - d1_mean) * (v - d1_mean);
    var_d1 /= static_cast<double>(d1.size());
    for (double v : d2) var_d2 += (v - d2_mean) * (v - d2_mean);
    var_d2 /= static_cast<double>(d2.size());
    double mobility = var > 0 ? std::sqrt(var_d1 / var) : 0.0;
    double mobility_d1 = var_d1 > 0 ? std::sqrt(var_d2 / var_d1) : 0.0;
    double complexity = mobility > 0 ? mobility_d1 / mobility : 0.0;

    double rms_d1 = 0, rms_d2 = 0;
    for (double v : d1) rms_d1 += v * v;
    rms_d1 = std::sqrt(rms_d1 / static_cast<double>(d1.size()));
    for (double v : d2) rms_d2 += v * v;
    rms_d2 = std::sqrt(rms_d2 / static_cast<double>(d2.size()));

    double lag1 = 0;
    if (var > 0) {
        double num = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) num += (samples[i] - mean) * (samples[i + 1] - mean);
        lag1 = num / (var * n);
    }

    f.insert(f.end(), {mean, var, sd, skew, kurt, mn, mx, mx - mn, rms, median, mad,
                       line_length, static_cast<double>(zero_crossings), var, mobility,
                       complexity, rms_d1, rms_d2, lag1});

    PsdTable psd = multitaper_psd({samples}, {"x"}, fs, bands::total.lo, bands::total.hi);
    double p_delta = band_power(psd, bands::delta, {0});
    double p_theta = band_power(psd, bands::theta, {0});
    double p_alpha = band_power(psd, bands::alpha, {0});
    double p_beta = band_power(psd, bands::beta, {0});
    double p_total = band_power(psd, bands::total, {0});
    f.insert(f.end(), {p_delta, p_theta, p_alpha, p_beta, p_total});
    if (p_total > 0) {
        f.insert(f.end(), {p_delta / p_total, p_theta / p_total, p_alpha / p_total,
                           p_beta / p_total});
    } else {
        f.insert(f.end(), {0.0, 0.0, 0.0, 0.0});
    }

    // Spectral entropy: normalized Shannon entropy of the PSD distribution.
    const auto& power = psd.power[0];
    double total = std::accumulate(power.begin(), power.end(), 0.0);
    double entropy = 0;
    if (total > 0 && power.size() > 1) {
        for (double p : power) {
            if (p <= 0) continue;
            double q = p / total;
            entropy -= q * std::log(q);
        }
        entropy /= std::log(static_cast<double>(power.size()));
    }
    f.push_back(entropy);

    // Spectral edge frequency: lowest grid frequency at which the cumulative
    // power reaches 95% of the in-band total.
    double sef = psd.freqs.back();
    if (total > 0) {
        double acc = 0;
        for (std::size_t j = 0; j < power.size(); ++j) {
            acc += power[j];
            if (acc >= 0.95 * total) {
                sef = psd.freqs[j];
                break;
            }
        }
    }
    f.push_back(sef);

    std::size_t peak = 0;
    for (std::size_t j = 1; j < power.size(); ++j)
        if (power[j] > power[peak]) peak = j;  // ties keep the lowest frequency
    f.push_back(psd.freqs[peak]);

    return f;
}

ArtifactMask detect_artifacts(const EpochSet& es, const MontageMap& montage,
                              const ArtifactConfig& cfg) {
    const std::size_t ne = es.n_epochs(), nc = es.n_channels();
    ArtifactMask mask;
    mask.contaminated.assign(ne, std::vector<std::uint8_t>(nc, 0));
    mask.alpha_excluded.assign(ne, std::vector<std::uint8_t>(nc, 0));
    mask.scores.assign(ne, std::vector<double>(nc, std::numeric_limits<double>::quiet_NaN()));

    std::vector<std::size_t> included;
    for (std::size_t e = 0; e < ne; ++e)
        if (es.include_mask[e]) included.push_back(e);
    if (included.size() < cfg.min_epochs) {
        mask.detection_skipped = true;
        mask.warning = "artifact detection skipped: only " + std::to_string(included.size()) +
                       " usable epochs (< " + std::to_string(cfg.min_epochs) + ")";
        return mask;
    }

    // Feature vectors for every included (epoch, channel).
    std::vector<std::vector<std::vector<double>>> feats(ne);
    std::vector<double> alpha_powers;
    for (auto e : included) {
        feats[e].resize(nc);
        for (std::size_t c = 0; c < nc; ++c) {
            feats[e][c] = extract_features(es.epochs[e][c], es.fs);
            alpha_powers.push_back(feats[e][c][kFeatAlphaPower]);
        }
    }

    // Alpha exemption threshold: midpoint of the population mean and median.
    double alpha_mean = std::accumulate(alpha_powers.begin(), alpha_powers.end(), 0.0) /
                        static_cast<double>(alpha_powers.size());
    double alpha_median = median_of(alpha_powers);
    mask.alpha_exempt_threshold = 0.5 * (alpha_mean + alpha_median);
    for (auto e : included)
        for (std::size_t c = 0; c < nc; ++c)
            if (feats[e][c][kFeatAlphaPower] > mask.alpha_exempt_threshold)
                mask.alpha_excluded[e][c] = 1;

    // HBOS over the pooled population of non-exempt entries.
    std::vector<std::vector<double>> population;
    std::vector<std::pair<std::size_t, std::size_t>> owner;
    for (auto e : included) {
        for (std::size_t c = 0; c < nc; ++c) {
            if (mask.alpha_excluded[e][c]) continue;
            population.push_back(feats[e][c]);
            owner.emplace_back(e, c);
        }
    }
    if (population.size() < 10) {
        mask.detection_skipped = true;
        mask.warning = "artifact detection skipped: fewer than 10 non-exempt entries";
        return mask;
    }
    std::vector<double> scores = hbos_score(population, cfg.hbos);
    for (std::size_t i = 0; i < owner.size(); ++i)
        mask.scores[owner[i].first][owner[i].second] = scores[i];

    const double candidate_cut = percentile(scores, cfg.candidate_percentile);
    const double neighbor_cut = percentile(scores, cfg.neighbor_percentile);

    // Precompute neighbor index lists once.
    std::vector<std::vector<std::size_t>> neighbor_idx(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        for (const auto& nb : montage.neighbors(es.channels[c])) {
            int j = -1;
            for (std::size_t k = 0; k < nc; ++k)
                if (es.channels[k] == nb) j = static_cast<int>(k);
            if (j >= 0) neighbor_idx[c].push_back(static_cast<std::size_t>(j));
        }
    }

    for (std::size_t i = 0; i < owner.size(); ++i) {
        if (scores[i] <= candidate_cut) continue;
        auto [e, c] = owner[i];
        std::vector<double> nb_scores;
        for (auto j : neighbor_idx[c]) {
            double s = mask.scores[e][j];
            if (!std::isnan(s)) nb_scores.push_back(s);
        }
        // No scored neighbor means locality cannot be established; leave the
        // candidate unconfirmed.
        if (nb_scores.empty()) continue;
        if (median_of(nb_scores) <= neighbor_cut) mask.contaminated[e][c] = 1;
    }

    mask.bad_channels = bad_channels_from_mask(mask.contaminated, es.include_mask, es.channels,
                                               cfg.bad_channel_fraction);
    return mask;
}

std::vector<std::string> bad_channels_from_mask(
    const std::vector<std::vector<std::uint8_t>>& contaminated,
    const std::vector<std::uint8_t>& include_mask, const std::vector<std::string>& channels,
    double fraction) {
    std::vector<std::string> bad;
    std::size_t n_included = 0;
    for (auto b : include_mask) n_included += b;
    if (n_included == 0) return bad;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        std::size_t flagged = 0;
        for (std::size_t e = 0; e < contaminated.size(); ++e)
            if (include_mask[e] && contaminated[e][c]) ++flagged;
        if (static_cast<double>(flagged) / static_cast<double>(n_included) > fraction)
            bad.push_back(channels[c]);
    }
    return bad;
}

RepairResult repair_artifacts(const EpochSet& es, const ArtifactMask& mask,
                              const MontageMap& montage) {
    const std::size_t ne = es.n_epochs(), nc = es.n_channels();
    if (mask.contaminated.size() != ne)
        throw DomainError("repair: mask epoch count does not match epoching");

    RepairResult out;
    out.epochs = es;
    out.unrepaired.assign(ne, std::vector<std::uint8_t>(nc, 0));

    std::vector<std::vector<std::size_t>> neighbor_idx(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        for (const auto& nb : montage.neighbors(es.channels[c])) {
            for (std::size_t k = 0; k < nc; ++k)
                if (es.channels[k] == nb) neighbor_idx[c].push_back(k);
        }
    }

    for (std::size_t e = 0; e < ne; ++e) {
        for (std::size_t c = 0; c < nc; ++c) {
            if (!mask.contaminated[e][c]) continue;
            std::vector<std::size_t> clean;
            for (auto j : neighbor_idx[c])
                if (!mask.contaminated[e][j]) clean.push_back(j);
            if (clean.empty()) {
                out.unrepaired[e][c] = 1;
                continue;
            }
            auto& dst = out.epochs.epochs[e][c];
            const std::size_t ns = dst.size();
            for (std::size_t s = 0; s < ns; ++s) {
                double acc = 0;
                // Averages the source (pre-repair) neighbor signals.
                for (auto j : clean) acc += es.epochs[e][j][s];
                dst[s] = acc / static_cast<double>(clean.size());
            }
            ++out.n_repaired;
        }
    }
    return out;
}

void write_mask_csv(const ArtifactMask& mask, const std::vector<std::string>& channels,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << "epoch_index,channel,flag\n";
    for (std::size_t e = 0; e < mask.contaminated.size(); ++e)
        for (std::size_t c = 0; c < channels.size(); ++c)
            if (mask.contaminated[e][c]) out << e << ',' << channels[c] << ",1\n";
}

}  // namespace eegbg
