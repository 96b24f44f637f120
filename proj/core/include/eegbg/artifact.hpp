#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eegbg/epochs.hpp"
#include "eegbg/hbos.hpp"
#include "eegbg/montage.hpp"
#include "eegbg/spectral.hpp"

namespace eegbg {

inline constexpr std::size_t kEpochChannelFeatureCount = 31;

// Names of the 31 per-(epoch, channel) features, in vector order:
//  0 mean                     11 line length
//  1 variance                 12 zero-crossing count
//  2 standard deviation       13 Hjorth activity
//  3 skewness                 14 Hjorth mobility
//  4 excess kurtosis          15 Hjorth complexity
//  5 min                      16 first-difference RMS
//  6 max                      17 second-difference RMS
//  7 peak-to-peak             18 lag-1 autocorrelation
//  8 RMS                      19..23 absolute band power
//  9 median                       (delta, theta, alpha, beta, total)
// 10 median absolute dev      24..27 relative band power
//                                 (delta, theta, alpha, beta)
//                             28 spectral entropy (1.5-30 Hz)
//                             29 spectral edge frequency 95%
//                             30 peak frequency
const std::array<const char*, kEpochChannelFeatureCount>& epoch_channel_feature_names();

inline constexpr std::size_t kFeatAlphaPower = 21;

// Extracts the 31 features from one epoch of one channel. Throws DomainError
// on non-finite samples.
std::vector<double> extract_features(const std::vector<double>& samples, double fs);

struct ArtifactConfig {
    // Entries scoring above this percentile of the pooled HBOS scores are
    // contamination candidates.
    double candidate_percentile = 95.0;
    // A candidate is confirmed only when the median score of its scored
    // neighbors does not exceed this percentile (the anomaly stays local).
    double neighbor_percentile = 75.0;
    // A channel contaminated in more than this fraction of included epochs
    // is listed as an artifact channel.
    double bad_channel_fraction = 0.30;
    std::size_t min_epochs = 10;
    HbosConfig hbos;
    MultitaperConfig multitaper;
};

struct ArtifactMask {
    // contaminated[epoch][channel]; alpha_excluded entries are exempt from
    // detection and never contaminated.
    std::vector<std::vector<std::uint8_t>> contaminated;
    std::vector<std::vector<std::uint8_t>> alpha_excluded;
    std::vector<std::string> bad_channels;
    std::vector<std::vector<double>> scores;  // NaN where not scored
    double alpha_exempt_threshold = 0.0;
    bool detection_skipped = false;
    std::string warning;

    std::size_t n_contaminated() const {
        std::size_t n = 0;
        for (const auto& row : contaminated)
            for (auto v : row) n += v;
        return n;
    }
};

// Unsupervised per-(epoch, channel) artifact detection:
//  1. entries whose alpha band power exceeds the midpoint of the population
//     mean and median are exempted (posterior dominant rhythm protection);
//  2. remaining entries are HBOS-scored over the pooled population of
//     included epochs x channels; scores above the candidate percentile mark
//     candidates;
//  3. a candidate is confirmed only when the median score of its non-exempt
//     neighbor channels in the same epoch does not exceed the neighbor
//     percentile, i.e. the anomaly does not extend to the neighbors; a
//     candidate with no scored neighbor is left unconfirmed;
//  4. channels flagged in more than bad_channel_fraction of included epochs
//     become bad channels.
// With fewer than min_epochs included epochs detection is skipped and an
// empty mask with a warning is returned.
ArtifactMask detect_artifacts(const EpochSet& es, const MontageMap& montage,
                              const ArtifactConfig& cfg = {});

struct RepairResult {
    EpochSet epochs;
    // Entries that stayed contaminated because every neighbor was also
    // contaminated in that epoch.
    std::vector<std::vector<std::uint8_t>> unrepaired;
    std::size_t n_repaired = 0;
};

// Replaces each contaminated (epoch, channel) with the samplewise mean of its
// non-contaminated neighbor channels in that epoch. Entries whose neighbors
// are all contaminated are left untouched and reported as unrepaired.
RepairResult repair_artifacts(const EpochSet& es, const ArtifactMask& mask,
                              const MontageMap& montage);

// Recomputes the bad-channel list from a mask (the 30% rule), for auditing.
std::vector<std::string> bad_channels_from_mask(
    const std::vector<std::vector<std::uint8_t>>& contaminated,
    const std::vector<std::uint8_t>& include_mask, const std::vector<std::string>& channels,
    double fraction);

// Writes `epoch_index,channel,flag` rows for every flagged entry.
void write_mask_csv(const ArtifactMask& mask, const std::vector<std::string>& channels,
                    const std::string& path);

}  // namespace eegbg
