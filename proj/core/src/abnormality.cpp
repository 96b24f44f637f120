#include "eegbg/abnormality.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "eegbg/errors.hpp"

namespace eegbg {

namespace {

// Score sums accumulate rounding error (0.8 + 0.7 + 0.9 lands a few ulp above
// 2.4); boundary cases must not flip on that.
constexpr double kSumGuard = 1e-9;

bool pair_is_lateral_indicator(const PairRatio& p) {
    // The frontopolar pair is not among the 14 indicator electrodes.
    return p.left != "Fp1";
}

bool pair_usable(const PairRatio& p, const std::set<std::string>& artifacts) {
    return !artifacts.count(p.left) && !artifacts.count(p.right);
}

// Anatomical ordering used for electrode lists in findings: right side first
// (mirrors the published indicator list), anterior to posterior within a side.
int electrode_rank(const std::string& e) {
    static const std::vector<std::string> order{"F8", "F4", "C4", "T4", "T6", "P4", "O2",
                                                "F7", "F3", "C3", "T3", "T5", "P3", "O1"};
    for (std::size_t i = 0; i < order.size(); ++i)
        if (order[i] == e) return static_cast<int>(i);
    return 100;
}

void sort_electrodes(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end(),
              [](const std::string& a, const std::string& b) {
                  return electrode_rank(a) < electrode_rank(b);
              });
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

bool detect_gbs(double pdr_left_hz, double pdr_right_hz, double slow_ratio_total_pct,
                const AbnormalityThresholds& th) {
    if (std::isnan(pdr_left_hz) || std::isnan(pdr_right_hz))
        throw DomainError("detect_gbs: PDR missing (model not run)");
    const bool both_below_primary = pdr_left_hz < th.pdr_hz && pdr_right_hz < th.pdr_hz;
    const bool both_below_secondary =
        pdr_left_hz < th.pdr_gbs_hz && pdr_right_hz < th.pdr_gbs_hz;
    return both_below_primary ||
           (both_below_secondary && slow_ratio_total_pct > th.slow_ratio_pct);
}

AlphaScoreResult alpha_amplitude_score(const std::vector<PairRatio>& lr_alpha,
                                       const std::set<std::string>& artifact_channels,
                                       const AbnormalityThresholds& th) {
    AlphaScoreResult res;
    for (const auto& p : lr_alpha) {
        if (!pair_is_lateral_indicator(p)) continue;
        if (!pair_usable(p, artifact_channels)) continue;
        if (std::abs(p.value) <= th.lr_ratio) continue;
        if (p.value > 0) {
            res.score_left += std::abs(p.value);
            res.lower_right_electrodes.push_back(p.right);
        } else {
            res.score_right += std::abs(p.value);
            res.lower_left_electrodes.push_back(p.left);
        }
    }
    sort_electrodes(res.lower_right_electrodes);
    sort_electrodes(res.lower_left_electrodes);
    res.asymmetric = res.score_left > th.alpha_score + kSumGuard ||
                     res.score_right > th.alpha_score + kSumGuard;
    return res;
}

AsymmetryResult detect_asymmetry(double pdr_left_hz, double pdr_right_hz,
                                 const AlphaScoreResult& alpha,
                                 const AbnormalityThresholds& th) {
    AsymmetryResult res;
    const bool pdr_diff = std::abs(pdr_left_hz - pdr_right_hz) > th.pdr_diff_hz;
    if (pdr_diff) {
        res.asymmetric = true;
        res.reason = "pdr_diff";
    } else if (alpha.asymmetric) {
        res.asymmetric = true;
        res.reason = "amplitude";
    }
    return res;
}

FocalSlowResult focal_slow(const std::vector<PairRatio>& lr_theta,
                           const std::vector<PairRatio>& lr_delta,
                           const std::set<std::string>& artifact_channels,
                           const MontageMap& montage, const AbnormalityThresholds& th) {
    if (lr_theta.size() != lr_delta.size())
        throw DomainError("focal_slow: theta/delta pair lists differ in length");

    struct PairState {
        const PairRatio* theta;
        const PairRatio* delta;
        bool usable = false;
        bool qualifies = false;
    };
    std::map<std::string, PairState> pairs;  // keyed by left member
    for (std::size_t i = 0; i < lr_theta.size(); ++i) {
        if (lr_theta[i].left != lr_delta[i].left)
            throw DomainError("focal_slow: theta/delta pair order mismatch");
        if (!pair_is_lateral_indicator(lr_theta[i])) continue;
        PairState st{&lr_theta[i], &lr_delta[i], false, false};
        st.usable = pair_usable(lr_theta[i], artifact_channels);
        st.qualifies = st.usable && (std::abs(st.theta->value) > th.lr_ratio ||
                                     std::abs(st.delta->value) > th.lr_ratio);
        pairs[lr_theta[i].left] = st;
    }

    FocalSlowResult res;
    for (auto& [left, st] : pairs) {
        if (!st.qualifies) continue;
        // Neighbor support via the left-member adjacency (the graph is mirror
        // symmetric, so this equals right-member adjacency).
        bool supported = false;
        for (const auto& nb : montage.neighbors(left)) {
            auto it = pairs.find(nb);
            if (it != pairs.end() && it->second.qualifies) {
                supported = true;
                break;
            }
        }
        if (!supported) continue;

        for (const PairRatio* r : {st.theta, st.delta}) {
            if (std::abs(r->value) <= th.lr_ratio) continue;
            if (r->value > 0) {
                res.score_left += std::abs(r->value);
                res.abnormal_electrodes.push_back(r->left);
            } else {
                res.score_right += std::abs(r->value);
                res.abnormal_electrodes.push_back(r->right);
            }
        }
    }
    sort_electrodes(res.abnormal_electrodes);
    res.focal = res.score_left > th.focal_score + kSumGuard ||
                res.score_right > th.focal_score + kSumGuard;
    if (!res.focal) res.abnormal_electrodes.clear();
    return res;
}

AbnormalityFindings assemble_findings(bool gbs, const AsymmetryResult& asym,
                                      const AlphaScoreResult& alpha,
                                      const FocalSlowResult& focal,
                                      const AbnormalityThresholds& th) {
    AbnormalityFindings f;
    f.gbs = gbs;
    f.asymmetry = asym.asymmetric;
    f.asymmetry_reason = asym.reason;
    f.focal_slow = focal.focal;
    f.focal_electrodes = focal.abnormal_electrodes;
    f.alpha = alpha;
    f.focal = focal;
    f.thresholds_used = th;
    return f;
}

AbnormalityFindings classify_background(const BackgroundFeatures& features,
                                        const MontageMap& montage,
                                        const AbnormalityThresholds& th) {
    std::set<std::string> artifacts(features.bad_channels.begin(), features.bad_channels.end());
    bool gbs = detect_gbs(features.pdr_left_hz, features.pdr_right_hz,
                          features.slow_ratio.total, th);
    auto alpha = alpha_amplitude_score(features.lr_ratio.at("alpha").per_pair, artifacts, th);
    auto asym = detect_asymmetry(features.pdr_left_hz, features.pdr_right_hz, alpha, th);
    auto focal = focal_slow(features.lr_ratio.at("theta").per_pair,
                            features.lr_ratio.at("delta").per_pair, artifacts, montage, th);
    return assemble_findings(gbs, asym, alpha, focal, th);
}

std::string region_phrase(const std::vector<std::string>& electrodes,
                          const MontageMap& montage) {
    if (electrodes.empty()) return "";

    enum Region { Frontal = 0, Central, Temporal, Parietal, Occipital, NRegions };
    static const std::map<std::string, Region> region_of = {
        {"Fp1", Frontal},  {"Fp2", Frontal},  {"F3", Frontal},  {"F4", Frontal},
        {"F7", Temporal},  {"F8", Temporal},  {"T3", Temporal}, {"T4", Temporal},
        {"T5", Temporal},  {"T6", Temporal},  {"C3", Central},  {"C4", Central},
        {"P3", Parietal},  {"P4", Parietal},  {"O1", Occipital}, {"O2", Occipital}};

    bool regions[NRegions] = {};
    bool left = false, right = false;
    for (const auto& e : electrodes) {
        auto it = region_of.find(e);
        if (it != region_of.end()) regions[it->second] = true;
        if (montage.is_analysis_channel(e)) {
            auto h = montage.hemisphere(e);
            left |= h == Hemisphere::Left;
            right |= h == Hemisphere::Right;
        }
    }

    std::vector<Region> present;
    for (int r = 0; r < NRegions; ++r)
        if (regions[r]) present.push_back(static_cast<Region>(r));

    std::string body;
    if (present.size() == 1) {
        static const char* names[] = {"frontal", "central", "temporal", "parietal", "occipital"};
        body = names[present[0]];
    } else if (present.size() == 2) {
        static const std::map<std::pair<int, int>, std::string> combos = {
            {{Frontal, Central}, "frontocentral"},   {{Frontal, Temporal}, "frontotemporal"},
            {{Central, Temporal}, "centrotemporal"}, {{Central, Parietal}, "centroparietal"},
            {{Temporal, Parietal}, "temporoparietal"},
            {{Temporal, Occipital}, "temporo-occipital"},
            {{Parietal, Occipital}, "parieto-occipital"},
            {{Frontal, Parietal}, "frontoparietal"}, {{Frontal, Occipital}, "fronto-occipital"},
            {{Central, Occipital}, "centro-occipital"}};
        body = combos.at({present[0], present[1]});
    } else {
        static const char* prefix[] = {"fronto", "centro", "temporo", "parieto", "occipital"};
        static const char* last[] = {"frontal", "central", "temporal", "parietal", "occipital"};
        for (std::size_t i = 0; i + 1 < present.size(); ++i) body += std::string(prefix[present[i]]) + "-";
        body += last[present.back()];
    }

    std::string side = left && right ? "bilateral" : (left ? "left" : "right");
    return side + " " + body + " region";
}

}  // namespace eegbg
