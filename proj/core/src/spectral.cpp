#include "eegbg/spectral.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include "eegbg/errors.hpp"

namespace eegbg {

namespace {

constexpr double kGridStep = 0.25;

// FFTW plan creation is not thread-safe; execution on distinct arrays is.
class RealFftPlan {
public:
    explicit RealFftPlan(int n) : n_(n) {
        std::vector<double> in(static_cast<std::size_t>(n));
        std::vector<std::complex<double>> out(static_cast<std::size_t>(n) / 2 + 1);
        plan_ = fftw_plan_dft_r2c_1d(n, in.data(),
                                     reinterpret_cast<fftw_complex*>(out.data()),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    ~RealFftPlan() { fftw_destroy_plan(plan_); }
    RealFftPlan(const RealFftPlan&) = delete;
    RealFftPlan& operator=(const RealFftPlan&) = delete;

    void execute(double* in, std::complex<double>* out) const {
        fftw_execute_dft_r2c(plan_, in, reinterpret_cast<fftw_complex*>(out));
    }
    int size() const { return n_; }

private:
    fftw_plan plan_;
    int n_;
};

const RealFftPlan& fft_plan(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<RealFftPlan>> cache;
    std::scoped_lock lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<RealFftPlan>(n);
    return *slot;
}

int grid_index(double f, double fs, int n, const char* what) {
    double df = fs / n;
    double idx = f / df;
    double rounded = std::round(idx);
    if (std::abs(idx - rounded) > 1e-9)
        throw DomainError(std::string("multitaper: ") + what + " " + std::to_string(f) +
                          " Hz does not lie on the 0.25 Hz grid");
    return static_cast<int>(rounded);
}

std::vector<int> group_indices(const PsdTable& psd, const std::vector<std::string>& labels) {
    std::vector<int> idx;
    for (const auto& l : labels) {
        int i = psd.channel_index(l);
        if (i < 0) throw DomainError("psd: channel " + l + " not present");
        idx.push_back(i);
    }
    return idx;
}

std::vector<std::string> side_channels(const MontageMap& m, Hemisphere h) {
    std::vector<std::string> out;
    for (const auto& c : m.analysis_channels())
        if (m.hemisphere(c) == h) out.push_back(c);
    return out;
}

}  // namespace

const std::vector<std::vector<double>>& dpss_tapers(int n, double time_bandwidth,
                                                    int n_tapers) {
    struct Key {
        int n;
        double nw;
        int k;
        bool operator<(const Key& o) const {
            return std::tie(n, nw, k) < std::tie(o.n, o.nw, o.k);
        }
    };
    static std::mutex mu;
    static std::map<Key, std::vector<std::vector<double>>> cache;

    if (n < 2) throw DomainError("dpss: need at least 2 samples");
    if (n_tapers < 1 || n_tapers >= n) throw DomainError("dpss: invalid taper count");
    if (time_bandwidth <= 0 || 2 * time_bandwidth >= n)
        throw DomainError("dpss: invalid time-bandwidth product");

    std::scoped_lock lock(mu);
    Key key{n, time_bandwidth, n_tapers};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    // Slepian sequences are the top eigenvectors of the symmetric tridiagonal
    // matrix with diagonal ((n-1-2t)/2)^2 cos(2 pi W) and off-diagonal
    // t (n-t) / 2, W = NW / n.
    const double w = time_bandwidth / n;
    Eigen::VectorXd diag(n), subdiag(n - 1);
    const double c = std::cos(2.0 * std::numbers::pi * w);
    for (int t = 0; t < n; ++t) {
        double half = (n - 1 - 2.0 * t) / 2.0;
        diag[t] = half * half * c;
    }
    for (int t = 1; t < n; ++t) subdiag[t - 1] = t * (n - t) / 2.0;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, subdiag, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw DomainError("dpss: eigendecomposition failed");

    std::vector<std::vector<double>> tapers(static_cast<std::size_t>(n_tapers));
    for (int k = 0; k < n_tapers; ++k) {
        // Eigenvalues ascend; take from the top.
        Eigen::VectorXd v = solver.eigenvectors().col(n - 1 - k);
        v /= v.norm();
        // Conventional polarity: symmetric tapers have positive mean,
        // antisymmetric ones a positive leading lobe.
        double sum = v.sum();
        double head = 0;
        for (int t = 0; t < n / 2; ++t) head += v[t];
        if ((k % 2 == 0 && sum < 0) || (k % 2 == 1 && head < 0)) v = -v;
        tapers[k].assign(v.data(), v.data() + n);
    }
    auto [pos, ok] = cache.emplace(key, std::move(tapers));
    (void)ok;
    return pos->second;
}

PsdTable multitaper_psd(const std::vector<std::vector<double>>& epoch,
                        const std::vector<std::string>& channels, double fs,
                        double fmin, double fmax, const MultitaperConfig& cfg) {
    if (epoch.empty()) throw DomainError("multitaper: empty epoch");
    if (channels.size() != epoch.size())
        throw DomainError("multitaper: channel label count does not match data");
    const int n = static_cast<int>(epoch.front().size());
    for (const auto& ch : epoch)
        if (static_cast<int>(ch.size()) != n)
            throw DomainError("multitaper: channels have unequal sample counts");
    if (fs <= 0) throw DomainError("multitaper: fs must be positive");
    if (fmax > fs / 2)
        throw DomainError("multitaper: fmax " + std::to_string(fmax) +
                          " Hz exceeds the Nyquist frequency " + std::to_string(fs / 2));
    if (fmin < 0 || fmin >= fmax) throw DomainError("multitaper: invalid band edges");

    const double native = fs / n;
    if (std::abs(native - kGridStep) > 1e-9)
        throw DomainError("multitaper: native resolution " + std::to_string(native) +
                          " Hz != 0.25 Hz; zero padding is not permitted, supply epochs of " +
                          std::to_string(1.0 / kGridStep) + " s");

    const int j0 = grid_index(fmin, fs, n, "fmin");
    const int j1 = grid_index(fmax, fs, n, "fmax");
    const int n_freqs = n / 2 + 1;
    if (j1 >= n_freqs) throw DomainError("multitaper: fmax outside spectrum");

    const auto& tapers = dpss_tapers(n, cfg.time_bandwidth, cfg.n_tapers);
    const auto& plan = fft_plan(n);

    PsdTable out;
    out.channels = channels;
    out.n_tapers = cfg.n_tapers;
    out.freqs.resize(static_cast<std::size_t>(j1 - j0 + 1));
    for (int j = j0; j <= j1; ++j) out.freqs[j - j0] = j * native;
    out.power.assign(epoch.size(), std::vector<double>(out.freqs.size(), 0.0));

    std::vector<double> buf(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(n_freqs));
    for (std::size_t c = 0; c < epoch.size(); ++c) {
        const auto& x = epoch[c];
        double mean = 0;
        for (double v : x) mean += v;
        mean /= n;
        std::vector<double> acc(static_cast<std::size_t>(n_freqs), 0.0);
        for (const auto& taper : tapers) {
            for (int t = 0; t < n; ++t) buf[t] = taper[t] * (x[t] - mean);
            plan.execute(buf.data(), spec.data());
            for (int j = 0; j < n_freqs; ++j) acc[j] += std::norm(spec[j]);
        }
        // Average tapers, scale to a one-sided density: S(f) = |X|^2 / fs,
        // doubled except at DC and Nyquist.
        for (int j = j0; j <= j1; ++j) {
            double s = acc[j] / (cfg.n_tapers * fs);
            if (j != 0 && !(n % 2 == 0 && j == n / 2)) s *= 2.0;
            out.power[c][j - j0] = s;
        }
    }
    return out;
}

std::vector<PsdTable> epoch_psds(const EpochSet& es, double fmin, double fmax,
                                 const MultitaperConfig& cfg) {
    std::vector<PsdTable> out;
    out.reserve(es.n_epochs());
    for (const auto& epoch : es.epochs)
        out.push_back(multitaper_psd(epoch, es.channels, es.fs, fmin, fmax, cfg));
    return out;
}

PsdTable mean_psd(const std::vector<PsdTable>& per_epoch,
                  const std::vector<std::uint8_t>& include_mask,
                  const std::vector<std::vector<std::uint8_t>>* entry_usable) {
    if (per_epoch.empty()) throw DomainError("mean_psd: no epochs");
    if (include_mask.size() != per_epoch.size())
        throw DomainError("mean_psd: mask length mismatch");

    PsdTable out;
    out.channels = per_epoch.front().channels;
    out.freqs = per_epoch.front().freqs;
    out.n_tapers = per_epoch.front().n_tapers;
    const std::size_t nc = out.channels.size(), nf = out.freqs.size();
    out.power.assign(nc, std::vector<double>(nf, 0.0));
    std::vector<std::size_t> counts(nc, 0);

    for (std::size_t e = 0; e < per_epoch.size(); ++e) {
        if (!include_mask[e]) continue;
        for (std::size_t c = 0; c < nc; ++c) {
            if (entry_usable && !(*entry_usable)[e][c]) continue;
            for (std::size_t f = 0; f < nf; ++f) out.power[c][f] += per_epoch[e].power[c][f];
            ++counts[c];
        }
    }
    for (std::size_t c = 0; c < nc; ++c) {
        if (counts[c] == 0) {
            std::fill(out.power[c].begin(), out.power[c].end(),
                      std::numeric_limits<double>::quiet_NaN());
        } else {
            for (auto& v : out.power[c]) v /= counts[c];
        }
    }
    return out;
}

double band_power(const PsdTable& psd, double lo, double hi,
                  const std::vector<int>& channel_idx) {
    if (channel_idx.empty()) throw DomainError("band_power: empty channel subset");
    if (psd.freqs.empty()) throw DomainError("band_power: empty grid");
    if (lo >= hi) throw DomainError("band_power: lo must be below hi");
    const double eps = 1e-9;
    if (lo < psd.freqs.front() - eps || hi > psd.freqs.back() + eps)
        throw DomainError("band_power: band [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "] outside grid [" +
                          std::to_string(psd.freqs.front()) + ", " +
                          std::to_string(psd.freqs.back()) + "]");

    const double step = psd.freq_step();
    auto to_idx = [&](double f) {
        double idx = (f - psd.freqs.front()) / step;
        double r = std::round(idx);
        if (std::abs(idx - r) > 1e-6)
            throw DomainError("band_power: edge " + std::to_string(f) + " not on grid");
        return static_cast<std::size_t>(r);
    };
    const std::size_t a = to_idx(lo), b = to_idx(hi);

    double sum = 0.0;
    for (int c : channel_idx) {
        if (c < 0 || c >= static_cast<int>(psd.power.size()))
            throw DomainError("band_power: channel index out of range");
        const auto& p = psd.power[c];
        for (std::size_t j = a; j < b; ++j) sum += 0.5 * (p[j] + p[j + 1]) * step;
    }
    return sum;
}

double band_power(const PsdTable& psd, Band band, const std::vector<int>& channel_idx) {
    return band_power(psd, band.lo, band.hi, channel_idx);
}

LateralValues ap_gradient(const PsdTable& psd, const MontageMap& montage) {
    (void)montage;
    const std::vector<std::string> ant_l{"Fp1", "F7", "F3"}, ant_r{"Fp2", "F8", "F4"};
    const std::vector<std::string> post_l{"T5", "P3", "O1"}, post_r{"T6", "P4", "O2"};
    auto ratio = [&](const std::vector<std::string>& ant, const std::vector<std::string>& post) {
        double a = band_power(psd, bands::alpha, group_indices(psd, ant));
        double p = band_power(psd, bands::alpha, group_indices(psd, post));
        if (p <= 0) throw DomainError("ap_gradient: degenerate posterior spectrum");
        return 100.0 * a / p;
    };
    LateralValues v;
    v.left = ratio(ant_l, post_l);
    v.right = ratio(ant_r, post_r);
    std::vector<std::string> ant_all = ant_l, post_all = post_l;
    ant_all.insert(ant_all.end(), ant_r.begin(), ant_r.end());
    post_all.insert(post_all.end(), post_r.begin(), post_r.end());
    v.total = ratio(ant_all, post_all);
    return v;
}

LateralValues total_power(const PsdTable& psd, const MontageMap& montage) {
    LateralValues v;
    auto left = group_indices(psd, side_channels(montage, Hemisphere::Left));
    auto right = group_indices(psd, side_channels(montage, Hemisphere::Right));
    std::vector<int> all(psd.channels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    v.left = band_power(psd, bands::total, left);
    v.right = band_power(psd, bands::total, right);
    v.total = band_power(psd, bands::total, all);
    return v;
}

LateralValues slow_ratio(const PsdTable& psd, const MontageMap& montage) {
    auto ratio = [&](const std::vector<int>& idx) {
        double tot = band_power(psd, bands::total, idx);
        if (tot <= 0) return 0.0;
        return 100.0 * band_power(psd, bands::slow, idx) / tot;
    };
    auto left = group_indices(psd, side_channels(montage, Hemisphere::Left));
    auto right = group_indices(psd, side_channels(montage, Hemisphere::Right));
    std::vector<int> all(psd.channels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    LateralValues v;
    v.left = ratio(left);
    v.right = ratio(right);
    v.total = ratio(all);
    return v;
}

LrBandRatio lr_band_ratio(const PsdTable& psd, Band band, const MontageMap& montage) {
    LrBandRatio out;
    double sum_left = 0, sum_right = 0;
    for (const auto& [l, r] : montage.mirror_pairs()) {
        double pl = band_power(psd, band, group_indices(psd, {l}));
        double pr = band_power(psd, band, group_indices(psd, {r}));
        PairRatio pr_out{l, r, 0.0, false};
        if (pl + pr <= 0) {
            pr_out.degenerate = true;
        } else {
            pr_out.value = 2.0 * (pl - pr) / (pl + pr);
        }
        out.per_pair.push_back(pr_out);
        sum_left += pl;
        sum_right += pr;
    }
    out.hemispheric = (sum_left + sum_right) > 0
                          ? 2.0 * (sum_left - sum_right) / (sum_left + sum_right)
                          : 0.0;
    return out;
}

double band_amplitude(const std::vector<PsdTable>& per_epoch_psds,
                      const std::vector<std::uint8_t>& include_mask, Band band,
                      const std::vector<std::vector<std::uint8_t>>* entry_usable) {
    if (per_epoch_psds.empty()) throw DomainError("band_amplitude: no epochs");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t e = 0; e < per_epoch_psds.size(); ++e) {
        if (!include_mask[e]) continue;
        const auto& psd = per_epoch_psds[e];
        for (std::size_t c = 0; c < psd.channels.size(); ++c) {
            if (entry_usable && !(*entry_usable)[e][c]) continue;
            double p = band_power(psd, band, {static_cast<int>(c)});
            sum += 2.0 * std::sqrt(2.0 * p);
            ++count;
        }
    }
    if (count == 0) throw DomainError("band_amplitude: no included epochs");
    return sum / count;
}

double band_amplitude(const EpochSet& es, Band band, const MultitaperConfig& cfg) {
    auto psds = epoch_psds(es, bands::total.lo, bands::total.hi, cfg);
    return band_amplitude(psds, es.include_mask, band);
}

void write_psd_csv(const PsdTable& psd, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << "channel,freq_hz,power\n";
    for (std::size_t c = 0; c < psd.channels.size(); ++c)
        for (std::size_t f = 0; f < psd.freqs.size(); ++f)
            out << psd.channels[c] << ',' << psd.freqs[f] << ',' << psd.power[c][f] << '\n';
}

}  // namespace eegbg
