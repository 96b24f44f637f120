#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eegbg/errors.hpp"
#include "eegbg/stats.hpp"
#include "synth.hpp"

using namespace eegbg;

TEST_CASE("published confusion matrix replays to the printed metrics") {
    auto cm = ConfusionMatrix::from_matrix({{{163, 17}, {15, 81}}});
    auto m = classification_metrics(cm);
    CHECK(std::round(m.f1 * 1000) / 1000 == doctest::Approx(0.835));
    CHECK(std::round(m.precision * 1000) / 1000 == doctest::Approx(0.827));
    CHECK(std::round(m.recall * 1000) / 1000 == doctest::Approx(0.844));
    CHECK(std::round(m.accuracy * 1000) / 1000 == doctest::Approx(0.884));
}

TEST_CASE("direct-count metrics") {
    auto m = classification_metrics({47, 7, 4, 42});
    CHECK(m.accuracy == doctest::Approx(0.890).epsilon(1e-3));
    CHECK(m.recall == doctest::Approx(0.922).epsilon(1e-3));
    CHECK(m.precision == doctest::Approx(0.870).epsilon(1e-3));
    CHECK(m.f1 == doctest::Approx(0.895).epsilon(1e-3));
}

TEST_CASE("metric edge cases and invariants") {
    SUBCASE("perfect classifier") {
        auto m = classification_metrics({10, 0, 0, 10});
        CHECK(m.f1 == 1.0);
        CHECK(m.precision == 1.0);
        CHECK(m.recall == 1.0);
        CHECK(m.accuracy == 1.0);
        CHECK_FALSE(m.degenerate);
    }
    SUBCASE("no true positives flags degeneracy") {
        auto m = classification_metrics({0, 0, 5, 5});
        CHECK(m.recall == 0.0);
        CHECK(m.degenerate);
    }
    SUBCASE("count scaling leaves metrics unchanged") {
        auto a = classification_metrics({47, 7, 4, 42});
        auto b = classification_metrics({47 * 3, 7 * 3, 4 * 3, 42 * 3});
        CHECK(a.f1 == doctest::Approx(b.f1).epsilon(1e-12));
        CHECK(a.accuracy == doctest::Approx(b.accuracy).epsilon(1e-12));
    }
    SUBCASE("all metrics within [0, 1] on random counts") {
        std::uint64_t state = 17;
        for (int i = 0; i < 200; ++i) {
            ConfusionMatrix cm{static_cast<std::uint64_t>(test::unit(state) * 50),
                               static_cast<std::uint64_t>(test::unit(state) * 50),
                               static_cast<std::uint64_t>(test::unit(state) * 50),
                               static_cast<std::uint64_t>(test::unit(state) * 50) + 1};
            auto m = classification_metrics(cm);
            for (double v : {m.f1, m.precision, m.recall, m.accuracy}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
}

TEST_CASE("McNemar exact branch") {
    CHECK(mcnemar(6, 6) == doctest::Approx(1.0));
    CHECK(mcnemar(0, 0) == doctest::Approx(1.0));
    // 2 * 0.5^10
    CHECK(mcnemar(10, 0) == doctest::Approx(0.001953125).epsilon(1e-9));
}

TEST_CASE("McNemar chi-square branch matches the frozen CDF oracle") {
    // chi2 = (|40-20|-1)^2/60 = 6.016667; survival at 1 dof = 0.014171
    CHECK(mcnemar(40, 20) == doctest::Approx(0.014171).epsilon(2e-4));
}

TEST_CASE("McNemar branches agree near the switchover") {
    auto chi2_p = [](std::uint64_t b, std::uint64_t c) {
        double stat =
            std::max(std::abs(static_cast<double>(b) - static_cast<double>(c)) - 1.0, 0.0);
        stat = stat * stat / static_cast<double>(b + c);
        return std::erfc(std::sqrt(stat / 2.0));
    };
    for (std::uint64_t b = 12; b <= 24; ++b) {
        std::uint64_t c = 24 - b;  // exact branch (b + c = 24)
        CHECK(std::abs(mcnemar(b, c) - chi2_p(b, c)) <= 0.02);
    }
}

TEST_CASE("two-proportion z-test") {
    CHECK(two_proportion_ztest(50, 100, 50, 100) == doctest::Approx(1.0));
    CHECK(two_proportion_ztest(90, 100, 50, 100) < 1e-3);
    CHECK(two_proportion_ztest(90, 100, 50, 100) ==
          doctest::Approx(two_proportion_ztest(50, 100, 90, 100)).epsilon(1e-12));
    CHECK_THROWS_AS(two_proportion_ztest(1, 0, 1, 2), DomainError);
}

TEST_CASE("Gwet AC1") {
    SUBCASE("unanimous raters give 1.0") {
        std::vector<std::vector<int>> ratings(6, std::vector<int>{1, 1, 1});
        CHECK(gwet_ac1(ratings).ac1 == doctest::Approx(1.0));
    }
    SUBCASE("hand-computed four-item example") {
        std::vector<std::vector<int>> ratings{{1, 1}, {0, 0}, {1, 0}, {1, 1}};
        auto r = gwet_ac1(ratings);
        CHECK(r.pa == doctest::Approx(0.75));
        CHECK(r.pe == doctest::Approx(0.46875));
        CHECK(r.ac1 == doctest::Approx(0.5294117647).epsilon(1e-9));
        CHECK(r.ci_low <= r.ac1);
        CHECK(r.ci_high >= r.ac1);
    }
    SUBCASE("independent uniform ratings drift to 0") {
        std::uint64_t state = 23;
        std::vector<std::vector<int>> ratings(1000, std::vector<int>(3));
        for (auto& item : ratings)
            for (auto& v : item) v = test::unit(state) < 0.5 ? 0 : 1;
        CHECK(std::abs(gwet_ac1(ratings).ac1) < 0.1);
    }
    SUBCASE("bounds and input validation") {
        std::vector<std::vector<int>> one_rating{{1}};
        CHECK_THROWS_AS(gwet_ac1(one_rating), DomainError);
        std::uint64_t state = 29;
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<std::vector<int>> ratings(20, std::vector<int>(3));
            for (auto& item : ratings)
                for (auto& v : item) v = test::unit(state) < 0.3 ? 0 : 1;
            auto r = gwet_ac1(ratings);
            CHECK(r.ac1 >= -1.0);
            CHECK(r.ac1 <= 1.0);
        }
    }
}
