#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eegbg/epochs.hpp"
#include "eegbg/recording.hpp"
#include "eegbg/spectral.hpp"

namespace eegbg {

enum class ReferenceScheme { Average, Rest, None };

// Loads a REST transfer matrix: whitespace-separated text, one row per
// channel in montage order, square [channels x channels].
std::vector<std::vector<double>> load_transfer_matrix(const std::string& path,
                                                      std::size_t n_channels);

// Rebuilds the reference. Average subtracts the per-sample channel mean;
// Rest left-multiplies by the supplied transfer matrix; None is identity.
Recording rereference(const Recording& rec, ReferenceScheme scheme,
                      const std::vector<std::vector<double>>* transfer = nullptr);

struct WakeSelectionConfig {
    double amplitude_limit_uv = 150.0;
    double ratio_sd_factor = 2.2;
    // Case-insensitive substrings that mark eye open/close technician events.
    std::vector<std::string> eye_event_patterns{"eye open", "eye close", "eo", "ec"};
};

struct WakeSelectionResult {
    std::vector<std::uint8_t> include_mask;
    std::size_t excluded_by_annotation = 0;
    std::size_t excluded_by_amplitude = 0;
    std::size_t excluded_by_band_ratio = 0;
    // Thresholds actually applied by the band-ratio rule (for provenance).
    double beta_ratio_threshold = 0.0;
    double delta_ratio_threshold = 0.0;
};

// Marks epochs that do not look like awake eyes-closed EEG. An epoch is
// excluded when any of:
//   (a) an eye open/close annotation falls inside the epoch interval,
//   (b) any sample of any channel exceeds the amplitude limit in magnitude,
//   (c) its channel-averaged beta or delta band power ratio (band power over
//       total 1.5-30 Hz power) exceeds mean + ratio_sd_factor * SD, where the
//       statistics are computed across the epochs surviving (a) and (b).
// `per_epoch_psds` must cover 1.5-30 Hz. Epochs already excluded in the
// incoming mask stay excluded.
WakeSelectionResult select_wake_epochs(const EpochSet& es,
                                       const std::vector<Annotation>& annotations,
                                       const std::vector<PsdTable>& per_epoch_psds,
                                       const WakeSelectionConfig& cfg = {});

}  // namespace eegbg
