#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eegbg/recording.hpp"

namespace eegbg {

// Non-overlapping fixed-length windows of a recording, contiguous from t=0.
// The trailing partial window is discarded at construction.
struct EpochSet {
    std::vector<std::string> channels;
    double fs = 0.0;
    double epoch_len_s = 0.0;
    // epochs[epoch][channel][sample], uV
    std::vector<std::vector<std::vector<double>>> epochs;
    std::vector<std::uint8_t> include_mask;  // 1 = included
    std::vector<double> source_offsets_s;

    std::size_t n_epochs() const { return epochs.size(); }
    std::size_t n_channels() const { return channels.size(); }
    std::size_t samples_per_epoch() const {
        return epochs.empty() || epochs.front().empty() ? 0 : epochs.front().front().size();
    }
    std::size_t n_included() const {
        std::size_t n = 0;
        for (auto b : include_mask) n += b;
        return n;
    }
};

// Cuts the recording into floor(duration / epoch_len_s) epochs with all
// epochs marked included. A recording shorter than one epoch yields an empty
// set. Requires epoch_len_s * fs to be an integer.
EpochSet segment_epochs(const Recording& rec, double epoch_len_s);

// Concatenates the epochs back into a continuous recording (used to export
// artifact-repaired data). Annotations are carried over from `source`.
Recording concatenate_epochs(const EpochSet& es, const Recording& source);

}  // namespace eegbg
