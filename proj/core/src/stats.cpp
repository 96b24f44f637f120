#include "eegbg/stats.hpp"

#include <algorithm>
#include <cmath>

#include "eegbg/errors.hpp"

namespace eegbg {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

ConfusionMatrix ConfusionMatrix::from_labels(const std::vector<int>& predicted,
                                             const std::vector<int>& actual) {
    if (predicted.size() != actual.size())
        throw DomainError("confusion matrix: prediction/label length mismatch");
    if (predicted.empty()) throw DomainError("confusion matrix: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        bool p = predicted[i] != 0, a = actual[i] != 0;
        if (p && a) ++cm.tp;
        else if (p && !a) ++cm.fp;
        else if (!p && a) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DomainError("classification_metrics: empty confusion matrix");
    ClassificationMetrics m;
    auto safe_div = [&](double num, double den) {
        if (den == 0) {
            m.degenerate = true;
            return 0.0;
        }
        return num / den;
    };
    m.precision = safe_div(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp));
    m.recall = safe_div(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fn));
    m.f1 = safe_div(2.0 * m.precision * m.recall, m.precision + m.recall);
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    return m;
}

double mcnemar(std::uint64_t b, std::uint64_t c) {
    const std::uint64_t n = b + c;
    if (n == 0) return 1.0;
    if (n < 25) {
        // Exact two-sided binomial(n, 1/2) test on the smaller count.
        const std::uint64_t k = std::min(b, c);
        long double tail = 0;
        long double coeff = 1;  // C(n, 0)
        for (std::uint64_t i = 0; i <= k; ++i) {
            tail += coeff;
            coeff = coeff * static_cast<long double>(n - i) / static_cast<long double>(i + 1);
        }
        long double p = 2.0L * tail * std::pow(0.5L, static_cast<long double>(n));
        return static_cast<double>(std::min<long double>(p, 1.0L));
    }
    // Continuity correction, clamped so b == c yields p = 1 like the exact test.
    double chi2 = std::max(std::abs(static_cast<double>(b) - static_cast<double>(c)) - 1.0, 0.0);
    chi2 = chi2 * chi2 / static_cast<double>(n);
    // Chi-square(1) survival function.
    return std::erfc(std::sqrt(chi2 / 2.0));
}

double two_proportion_ztest(std::uint64_t k1, std::uint64_t n1, std::uint64_t k2,
                            std::uint64_t n2) {
    if (n1 == 0 || n2 == 0) throw DomainError("ztest: empty group");
    if (k1 > n1 || k2 > n2) throw DomainError("ztest: successes exceed trials");
    double p1 = static_cast<double>(k1) / n1, p2 = static_cast<double>(k2) / n2;
    double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
    double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
    if (se == 0) return 1.0;
    double z = (p1 - p2) / se;
    return 2.0 * (1.0 - normal_cdf(std::abs(z)));
}

Ac1Result gwet_ac1(const std::vector<std::vector<int>>& ratings) {
    const std::size_t n = ratings.size();
    if (n == 0) throw DomainError("gwet_ac1: no items");

    std::vector<double> pa_i(n), pi_i(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = ratings[i];
        if (r.size() < 2)
            throw DomainError("gwet_ac1: item " + std::to_string(i) + " has fewer than 2 ratings");
        double ones = 0;
        for (int v : r) {
            if (v != 0 && v != 1) throw DomainError("gwet_ac1: ratings must be binary");
            ones += v;
        }
        const double m = static_cast<double>(r.size());
        // Pairwise agreement among the m ratings of this item.
        pa_i[i] = (ones * (ones - 1) + (m - ones) * (m - ones - 1)) / (m * (m - 1));
        pi_i[i] = ones / m;
    }

    double pa = 0, pi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        pa += pa_i[i];
        pi += pi_i[i];
    }
    pa /= static_cast<double>(n);
    pi /= static_cast<double>(n);
    const double pe = 2.0 * pi * (1.0 - pi);

    Ac1Result res;
    res.pa = pa;
    res.pe = pe;
    if (pe >= 1.0) {
        res.ac1 = 1.0;
        res.ci_low = res.ci_high = 1.0;
        return res;
    }
    res.ac1 = (pa - pe) / (1.0 - pe);

    if (n > 1) {
        // Gwet's linearized item-level variance estimator.
        double var = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double ac1_i = (pa_i[i] - pe) / (1.0 - pe);
            double pe_i = 2.0 * pi_i[i] * (1.0 - pi);
            double star = ac1_i - 2.0 * (1.0 - res.ac1) * (pe_i - pe) / (1.0 - pe);
            var += (star - res.ac1) * (star - res.ac1);
        }
        var /= static_cast<double>(n - 1) * static_cast<double>(n);
        double half = 1.96 * std::sqrt(var);
        res.ci_low = std::max(-1.0, res.ac1 - half);
        res.ci_high = std::min(1.0, res.ac1 + half);
    } else {
        res.ci_low = res.ci_high = res.ac1;
    }
    return res;
}

}  // namespace eegbg
