#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "eegbg/montage.hpp"

namespace eegbg {

struct Annotation {
    double onset_s = 0.0;
    std::string label;
};

// Multichannel EEG time series in microvolts. Row-major [channels x samples],
// all channels share one sampling rate and sample count.
struct Recording {
    std::vector<std::string> channels;
    double fs = 0.0;
    std::vector<std::vector<double>> data;  // [channel][sample], uV
    std::vector<Annotation> annotations;

    std::size_t n_channels() const { return channels.size(); }
    std::size_t n_samples() const { return data.empty() ? 0 : data.front().size(); }
    double duration_s() const { return fs > 0 ? static_cast<double>(n_samples()) / fs : 0.0; }

    int channel_index(const std::string& label) const {
        for (std::size_t i = 0; i < channels.size(); ++i)
            if (channels[i] == label) return static_cast<int>(i);
        return -1;
    }
};

// Restricts a recording to the 19 analysis channels in canonical order,
// resolving label aliases (T7->T3 etc.). Non-EEG channels are dropped.
// Throws DomainError listing any missing analysis channel. Idempotent.
Recording apply_montage(const Recording& rec, const MontageMap& montage);

// Truncates the recording to its first `seconds` (no-op when shorter).
Recording crop(const Recording& rec, double seconds);

}  // namespace eegbg
