#include "eegbg/hbos.hpp"

#include <algorithm>
#include <cmath>

#include "eegbg/errors.hpp"

namespace eegbg {

std::vector<double> hbos_score(const std::vector<std::vector<double>>& features,
                               const HbosConfig& cfg) {
    const std::size_t n = features.size();
    if (n < 10) throw DomainError("hbos_score: need at least 10 items, got " + std::to_string(n));
    const std::size_t dims = features.front().size();
    for (const auto& f : features)
        if (f.size() != dims) throw DomainError("hbos_score: ragged feature matrix");

    const int bins = cfg.bin_count > 0
                         ? cfg.bin_count
                         : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));

    std::vector<double> scores(n, 0.0);
    std::vector<int> counts(static_cast<std::size_t>(bins));
    std::vector<int> assignment(n);
    for (std::size_t d = 0; d < dims; ++d) {
        double lo = features[0][d], hi = lo;
        for (const auto& f : features) {
            lo = std::min(lo, f[d]);
            hi = std::max(hi, f[d]);
        }
        if (hi == lo) continue;  // constant dimension carries no outlier signal

        const double width = (hi - lo) / bins;
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            int b = static_cast<int>((features[i][d] - lo) / width);
            b = std::clamp(b, 0, bins - 1);
            assignment[i] = b;
            ++counts[b];
        }
        int max_count = *std::max_element(counts.begin(), counts.end());
        for (std::size_t i = 0; i < n; ++i) {
            double height = static_cast<double>(counts[assignment[i]]) / max_count;
            scores[i] += std::log(1.0 / std::max(height, cfg.epsilon));
        }
    }
    return scores;
}

}  // namespace eegbg
