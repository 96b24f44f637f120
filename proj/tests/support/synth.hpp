#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eegbg/pdr_train.hpp"
#include "eegbg/recording.hpp"
#include "eegbg/spectral.hpp"

namespace eegbg::test {

struct Tone {
    double freq_hz;
    double amplitude_uv;
    double phase = 0.0;
};

// Multichannel synthetic recording: per-channel tone mixtures plus seeded
// white noise. Channels default to the 19-channel analysis montage.
Recording make_recording(double fs, double duration_s,
                         const std::map<std::string, std::vector<Tone>>& tones,
                         double noise_sigma_uv, std::uint64_t seed,
                         std::vector<std::string> channels = {});

// Adds a square pulse train (period_s, duty 0.5, amplitude uV) to one channel
// inside the sample range [from_s, to_s).
void add_square_pulses(Recording& rec, const std::string& channel, double amplitude_uv,
                       double period_s, double from_s, double to_s);

// Naive O(n^2) DFT multitaper oracle: same estimator definition as the
// production path but with a direct DFT loop instead of the FFT library.
// Returns the one-sided density on the full grid [0, fs/2].
std::vector<double> oracle_multitaper_psd(const std::vector<double>& samples, double fs,
                                          double time_bandwidth, int n_tapers);

// Minimal EDF writer independent of the production module, for loader
// round-trip oracles. Writes int16 digital codes directly. When
// override_n_records is set, the header's record count field is forced to
// n_records_value (for invalid-header cases).
void write_edf_fixture(const std::string& path, const std::vector<std::string>& channels,
                       int fs, const std::vector<std::vector<std::int16_t>>& digital,
                       double phys_min, double phys_max, bool override_n_records = false,
                       long n_records_value = 0);

// Synthetic PDR corpus: Gaussian alpha bump at a known frequency over a 1/f
// background plus seeded noise, two sides per file sharing one group key and
// label. Labels lie on the 4-12 Hz, 0.5-step ladder.
std::vector<LabeledExample> make_pdr_corpus(std::size_t n_files, std::uint64_t seed);

// Deterministic uniform in [0, 1).
double unit(std::uint64_t& state);

}  // namespace eegbg::test
