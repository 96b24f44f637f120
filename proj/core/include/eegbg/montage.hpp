#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace eegbg {

enum class Hemisphere { Left, Right, Midline };

// The 19-channel analysis montage of the international 10-20 system:
// canonical channel order, geometric neighbor graph, hemisphere membership
// and left/right mirror pairs.
//
// Schematic layout used for the neighbor graph (nose at top):
//
//            Fp1   Fp2
//       F7   F3  Fz  F4   F8
//       T3   C3  Cz  C4   T4
//       T5   P3  Pz  P4   T6
//            O1   O2
//
// Lateral channels connect along the anterior-posterior chains and to the
// adjacent channel in the same row; midline channels connect along the
// midline and to the polar caps (Fz to Fp1/Fp2, Pz to O1/O2). Lateral-to-
// midline edges are deliberately absent so that e.g. F3's neighbors are
// exactly {Fp1, F7, C3}.
class MontageMap {
public:
    static const MontageMap& standard19();

    const std::vector<std::string>& analysis_channels() const { return channels_; }
    const std::set<std::string>& neighbors(const std::string& channel) const;
    Hemisphere hemisphere(const std::string& channel) const;
    // Mirror pairs (left, right) in anterior-to-posterior order, Fp pair first.
    const std::vector<std::pair<std::string, std::string>>& mirror_pairs() const {
        return pairs_;
    }
    const std::string& mirror(const std::string& channel) const;
    bool is_analysis_channel(const std::string& channel) const;

    // Maps vendor spellings onto the canonical label: case-insensitive, plus
    // the alias table T7->T3, T8->T4, P7->T5, P8->T6. Returns empty string
    // when the label is not an analysis channel under any alias.
    static std::string canonical_label(const std::string& raw);

private:
    MontageMap();
    std::vector<std::string> channels_;
    std::map<std::string, std::set<std::string>> adjacency_;
    std::map<std::string, Hemisphere> hemisphere_;
    std::vector<std::pair<std::string, std::string>> pairs_;
    std::map<std::string, std::string> mirror_;
};

}  // namespace eegbg
