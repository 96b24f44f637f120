#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace eegbg {

// Binary confusion counts. from_matrix follows the sklearn-style layout
// [[tn, fp], [fn, tp]] (rows = actual negative/positive, columns = predicted),
// which is the orientation that reproduces published metric values.
struct ConfusionMatrix {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    static ConfusionMatrix from_matrix(const std::array<std::array<std::uint64_t, 2>, 2>& m) {
        return {m[1][1], m[0][1], m[1][0], m[0][0]};
    }
    static ConfusionMatrix from_labels(const std::vector<int>& predicted,
                                       const std::vector<int>& actual);
    std::uint64_t total() const { return tp + fp + fn + tn; }
};

struct ClassificationMetrics {
    double f1 = 0, precision = 0, recall = 0, accuracy = 0;
    // Set when a zero denominator forced any metric to 0.
    bool degenerate = false;
};

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm);

// McNemar's test on discordant counts: exact two-sided binomial when
// b + c < 25, otherwise the continuity-corrected chi-square
// (|b - c| - 1)^2 / (b + c) with one degree of freedom. Returns the two-sided
// p-value (1.0 when b == c == 0).
double mcnemar(std::uint64_t b, std::uint64_t c);

// Two-sided two-proportion z-test with pooled variance.
double two_proportion_ztest(std::uint64_t k1, std::uint64_t n1, std::uint64_t k2,
                            std::uint64_t n2);

struct Ac1Result {
    double ac1 = 0;
    double ci_low = 0, ci_high = 0;
    double pa = 0, pe = 0;
};

// Gwet's first-order agreement coefficient for binary ratings
// [items x raters]: AC1 = (Pa - Pe) / (1 - Pe) with Pa the mean pairwise
// agreement per item and Pe = 2 pi (1 - pi), pi the mean item-level
// proportion of category-1 ratings. The 95% CI uses Gwet's item-level
// variance estimator with a normal approximation. Every item needs at least
// two ratings.
Ac1Result gwet_ac1(const std::vector<std::vector<int>>& ratings);

// Standard normal CDF (exposed for reuse in tests and tools).
double normal_cdf(double z);

}  // namespace eegbg
