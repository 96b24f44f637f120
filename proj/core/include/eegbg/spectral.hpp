#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eegbg/epochs.hpp"
#include "eegbg/montage.hpp"

namespace eegbg {

// Frequency bands in Hz. Band power integrals are trapezoidal over the
// closed interval, which keeps adjacent bands exactly additive.
struct Band {
    double lo;
    double hi;
};
namespace bands {
inline constexpr Band delta{1.5, 4.0};
inline constexpr Band theta{4.0, 8.0};
inline constexpr Band alpha{8.0, 13.0};
inline constexpr Band beta{13.0, 30.0};
inline constexpr Band slow{1.5, 8.0};
inline constexpr Band total{1.5, 30.0};
}  // namespace bands

// Per-channel one-sided power spectral density on a 0.25 Hz grid, uV^2/Hz.
struct PsdTable {
    std::vector<std::string> channels;
    std::vector<double> freqs;               // strictly increasing, step 0.25
    std::vector<std::vector<double>> power;  // [channel][freq]
    int n_tapers = 0;

    double freq_step() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }
    int channel_index(const std::string& label) const {
        for (std::size_t i = 0; i < channels.size(); ++i)
            if (channels[i] == label) return static_cast<int>(i);
        return -1;
    }
};

struct MultitaperConfig {
    double time_bandwidth = 4.0;  // NW
    int n_tapers = 7;             // K
};

// Discrete prolate spheroidal sequences (unit energy, concentration-ordered
// descending). Computed from the standard symmetric tridiagonal formulation
// and cached per (n, NW, K).
const std::vector<std::vector<double>>& dpss_tapers(int n, double time_bandwidth,
                                                    int n_tapers);

// Multitaper PSD of one epoch [channels x samples]: the unweighted average of
// K DPSS-tapered one-sided periodograms, restricted to [fmin, fmax]. Each
// channel is demeaned before tapering. Requires the native DFT bin width
// fs/samples to be exactly 0.25 Hz (no zero padding) and fmax <= fs/2.
PsdTable multitaper_psd(const std::vector<std::vector<double>>& epoch,
                        const std::vector<std::string>& channels, double fs,
                        double fmin, double fmax, const MultitaperConfig& cfg = {});

// PSDs for every epoch on the same grid.
std::vector<PsdTable> epoch_psds(const EpochSet& es, double fmin, double fmax,
                                 const MultitaperConfig& cfg = {});

// Recording-level PSD: the per-channel mean of per-epoch PSDs over epochs
// with include_mask set and, when `entry_usable` is given, usable
// (epoch, channel) entries. A channel with no usable epochs gets all-NaN
// power (callers decide whether that is an error).
PsdTable mean_psd(const std::vector<PsdTable>& per_epoch,
                  const std::vector<std::uint8_t>& include_mask,
                  const std::vector<std::vector<std::uint8_t>>* entry_usable = nullptr);

// Trapezoidal band power integral over [lo, hi], summed over the given
// channel indices. Requires [lo, hi] inside the grid and a nonempty subset.
double band_power(const PsdTable& psd, double lo, double hi,
                  const std::vector<int>& channel_idx);
double band_power(const PsdTable& psd, Band band, const std::vector<int>& channel_idx);

// One value per laterality group.
struct LateralValues {
    double left = 0.0;
    double right = 0.0;
    double total = 0.0;
};

// Anterior-to-posterior alpha power ratio in percent (anterior Fp1, Fp2, F7,
// F8, F3, F4 over posterior T5, T6, P3, P4, O1, O2), for the left electrodes,
// the right electrodes, and all twelve. Throws DomainError on a zero
// posterior spectrum.
LateralValues ap_gradient(const PsdTable& psd, const MontageMap& montage);

// Total band power 1.5-30 Hz summed over the left, right, and all channels.
LateralValues total_power(const PsdTable& psd, const MontageMap& montage);

// 100 * P(1.5-8) / P(1.5-30) per electrode group.
LateralValues slow_ratio(const PsdTable& psd, const MontageMap& montage);

// Left-right band power ratio R = 2 (P_left - P_right) / (P_left + P_right),
// bounded in [-2, 2]; positive means the left side carries more power.
struct PairRatio {
    std::string left, right;
    double value = 0.0;
    bool degenerate = false;  // both powers zero
};
struct LrBandRatio {
    std::vector<PairRatio> per_pair;  // one per mirror pair, Fp pair first
    double hemispheric = 0.0;         // from summed left vs summed right power
};
LrBandRatio lr_band_ratio(const PsdTable& psd, Band band, const MontageMap& montage);

// Band amplitude in uV: the mean over included epochs and usable channels of
// 2*sqrt(2*P), the peak-to-peak value of a sinusoid carrying the epoch-channel
// band power P. Throws DomainError when no epoch is included.
double band_amplitude(const std::vector<PsdTable>& per_epoch_psds,
                      const std::vector<std::uint8_t>& include_mask, Band band,
                      const std::vector<std::vector<std::uint8_t>>* entry_usable = nullptr);

// Convenience overload computing per-epoch PSDs on the 1.5-30 Hz grid.
double band_amplitude(const EpochSet& es, Band band, const MultitaperConfig& cfg = {});

// Writes `channel,freq_hz,power` rows for debugging.
void write_psd_csv(const PsdTable& psd, const std::string& path);

}  // namespace eegbg
