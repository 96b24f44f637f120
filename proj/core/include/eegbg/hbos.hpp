#pragma once

#include <vector>

namespace eegbg {

struct HbosConfig {
    // Static-width bins per feature dimension: ceil(sqrt(n_items)) by default
    // (bin_count = 0). A zero-variance dimension contributes 0 to all scores.
    int bin_count = 0;
    double epsilon = 1e-12;
};

// Histogram-based outlier score. For every feature dimension a static-width
// histogram is built over the item population and bin heights are normalized
// so the tallest bin has height 1; an item's score is
//   sum_d log(1 / max(height_d(item), epsilon)).
// Higher means more anomalous. Requires at least 10 items.
std::vector<double> hbos_score(const std::vector<std::vector<double>>& features,
                               const HbosConfig& cfg = {});

}  // namespace eegbg
