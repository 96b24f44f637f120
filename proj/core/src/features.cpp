#include "eegbg/features.hpp"

#include <cmath>

#include "eegbg/errors.hpp"

namespace eegbg {

BackgroundFeatures compute_background_features(
    const PsdTable& recording_psd, const std::vector<PsdTable>& per_epoch_psds,
    const std::vector<std::uint8_t>& include_mask, const MontageMap& montage,
    const std::vector<std::vector<std::uint8_t>>* entry_usable) {
    for (std::size_t c = 0; c < recording_psd.channels.size(); ++c)
        for (double v : recording_psd.power[c])
            if (std::isnan(v))
                throw DomainError("background features: channel " + recording_psd.channels[c] +
                                  " has no usable epochs");

    BackgroundFeatures bf;
    bf.ap_gradient = ap_gradient(recording_psd, montage);
    bf.total_power = total_power(recording_psd, montage);
    bf.slow_ratio = slow_ratio(recording_psd, montage);
    bf.lr_ratio["alpha"] = lr_band_ratio(recording_psd, bands::alpha, montage);
    bf.lr_ratio["theta"] = lr_band_ratio(recording_psd, bands::theta, montage);
    bf.lr_ratio["delta"] = lr_band_ratio(recording_psd, bands::delta, montage);
    bf.lr_ratio["beta"] = lr_band_ratio(recording_psd, bands::beta, montage);
    bf.band_amplitude_uv["alpha"] =
        band_amplitude(per_epoch_psds, include_mask, bands::alpha, entry_usable);
    bf.band_amplitude_uv["theta"] =
        band_amplitude(per_epoch_psds, include_mask, bands::theta, entry_usable);
    bf.band_amplitude_uv["delta"] =
        band_amplitude(per_epoch_psds, include_mask, bands::delta, entry_usable);
    bf.band_amplitude_uv["beta"] =
        band_amplitude(per_epoch_psds, include_mask, bands::beta, entry_usable);
    bf.n_epochs_total = include_mask.size();
    for (auto b : include_mask) bf.n_epochs_included += b;
    return bf;
}

}  // namespace eegbg
