#include "eegbg/pdr_baseline.hpp"

#include <algorithm>

#include "eegbg/errors.hpp"

namespace eegbg {

double spectral_peak_baseline(const PdrFeatureMap& map) {
    if (map.values.empty()) throw DomainError("baseline: empty feature map");
    double acc = 0;
    for (const auto& row : map.values) {
        const int n = static_cast<int>(row.size());
        int peak = 0;
        for (int j = 1; j < n; ++j)
            if (row[j] > row[peak]) peak = j;
        const int lo = std::max(0, peak - 1), hi = std::min(n - 1, peak + 1);
        double wsum = 0, fsum = 0;
        for (int j = lo; j <= hi; ++j) {
            double f = kPdrMapFminHz + 0.25 * j;
            wsum += row[j];
            fsum += row[j] * f;
        }
        acc += wsum > 0 ? fsum / wsum : kPdrMapFminHz + 0.25 * peak;
    }
    double hz = acc / static_cast<double>(map.values.size());
    return std::clamp(hz, kPdrLabelMinHz, kPdrLabelMaxHz);
}

}  // namespace eegbg
