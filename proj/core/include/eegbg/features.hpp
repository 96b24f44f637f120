#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "eegbg/spectral.hpp"

namespace eegbg {

// Everything the abnormality rules and the report need about the background.
struct BackgroundFeatures {
    LateralValues ap_gradient;  // percent
    LateralValues total_power;  // uV^2
    LateralValues slow_ratio;   // percent
    // Keyed by band name (alpha, theta, delta, beta; beta is computed but not
    // used by classification).
    std::map<std::string, LrBandRatio> lr_ratio;
    std::map<std::string, double> band_amplitude_uv;
    double pdr_left_hz = std::nan("");
    double pdr_right_hz = std::nan("");
    std::vector<std::string> bad_channels;
    std::size_t n_epochs_total = 0;
    std::size_t n_epochs_included = 0;

    double included_fraction() const {
        return n_epochs_total ? static_cast<double>(n_epochs_included) /
                                    static_cast<double>(n_epochs_total)
                              : 0.0;
    }
};

// Derives the band features from the recording-level PSD plus per-epoch PSDs
// (for amplitudes). PDR and bad_channels are filled by the caller.
BackgroundFeatures compute_background_features(
    const PsdTable& recording_psd, const std::vector<PsdTable>& per_epoch_psds,
    const std::vector<std::uint8_t>& include_mask, const MontageMap& montage,
    const std::vector<std::vector<std::uint8_t>>* entry_usable = nullptr);

}  // namespace eegbg
