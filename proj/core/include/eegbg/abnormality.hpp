#pragma once

#include <set>
#include <string>
#include <vector>

#include "eegbg/features.hpp"
#include "eegbg/montage.hpp"
#include "eegbg/spectral.hpp"

namespace eegbg {

// Classification thresholds; defaults are the published operating points.
struct AbnormalityThresholds {
    double pdr_hz = 7.5;           // GBS: both PDRs strictly below
    double pdr_gbs_hz = 8.0;       // GBS second criterion PDR bound
    double slow_ratio_pct = 50.0;  // GBS second criterion slow ratio bound
    double lr_ratio = 0.5;         // |left-right ratio| qualification
    double pdr_diff_hz = 1.0;      // asymmetry on PDR difference
    double focal_score = 2.4;      // focal slow waves score bound
    double alpha_score = 1.6;      // alpha amplitude score bound
};

// Generalized background slowing: (both PDRs < 7.5 Hz) OR (both PDRs < 8 Hz
// AND total slow ratio > 50%). All comparisons strict. Throws DomainError on
// a missing (NaN) PDR.
bool detect_gbs(double pdr_left_hz, double pdr_right_hz, double slow_ratio_total_pct,
                const AbnormalityThresholds& th = {});

struct AlphaScoreResult {
    double score_left = 0;
    double score_right = 0;
    bool asymmetric = false;
    // Pair members on the weaker (lower alpha) side, one entry per qualifying
    // pair, in the order right electrodes then left electrodes.
    std::vector<std::string> lower_right_electrodes;  // from R > +0.5 pairs
    std::vector<std::string> lower_left_electrodes;   // from R < -0.5 pairs
};

// Alpha amplitude score over the 14 lateral electrodes (7 mirror pairs; the
// frontopolar pair is not an indicator). Each non-artifact pair with
// |R| > 0.5 contributes |R| once, to the left score when R is positive (the
// left side carries more alpha power) and to the right score otherwise. The
// background is amplitude-asymmetric when either score exceeds the bound.
// A pair is skipped when either member is an artifact channel.
AlphaScoreResult alpha_amplitude_score(const std::vector<PairRatio>& lr_alpha,
                                       const std::set<std::string>& artifact_channels,
                                       const AbnormalityThresholds& th = {});

struct AsymmetryResult {
    bool asymmetric = false;
    // "pdr_diff" when the PDR difference rule fired (it wins the label when
    // both fire), "amplitude" for the alpha score rule, "" when symmetric.
    std::string reason;
};

AsymmetryResult detect_asymmetry(double pdr_left_hz, double pdr_right_hz,
                                 const AlphaScoreResult& alpha,
                                 const AbnormalityThresholds& th = {});

struct FocalSlowResult {
    double score_left = 0;
    double score_right = 0;
    bool focal = false;
    // Pair members on the side where slow power dominates, anterior first.
    std::vector<std::string> abnormal_electrodes;
};

// Focal slow waves over the 7 lateral pairs: a pair qualifies when its theta
// or delta ratio magnitude exceeds the bound AND some non-artifact
// neighboring pair also qualifies (lesions extend to neighbors, single-
// electrode artifacts do not). Each qualifying band of an abnormal pair adds
// |R| to the side given by its sign; electrodes are reported on that side.
// Focal slow waves are present when either side score exceeds the bound.
FocalSlowResult focal_slow(const std::vector<PairRatio>& lr_theta,
                           const std::vector<PairRatio>& lr_delta,
                           const std::set<std::string>& artifact_channels,
                           const MontageMap& montage, const AbnormalityThresholds& th = {});

struct AbnormalityFindings {
    bool gbs = false;
    bool asymmetry = false;
    std::string asymmetry_reason;
    bool focal_slow = false;
    std::vector<std::string> focal_electrodes;
    AlphaScoreResult alpha;
    FocalSlowResult focal;
    AbnormalityThresholds thresholds_used;
};

AbnormalityFindings assemble_findings(bool gbs, const AsymmetryResult& asym,
                                      const AlphaScoreResult& alpha,
                                      const FocalSlowResult& focal,
                                      const AbnormalityThresholds& th);

// Runs all three detectors over computed background features.
AbnormalityFindings classify_background(const BackgroundFeatures& features,
                                        const MontageMap& montage,
                                        const AbnormalityThresholds& th = {});

// Maps an electrode set to a clinical locality phrase, e.g. {F8, F4} ->
// "right frontotemporal region".
std::string region_phrase(const std::vector<std::string>& electrodes,
                          const MontageMap& montage);

}  // namespace eegbg
