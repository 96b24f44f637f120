#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eegbg/abnormality.hpp"
#include "eegbg/errors.hpp"
#include "synth.hpp"

using namespace eegbg;

namespace {

// Builds the 8 mirror-pair ratio list with every value 0; callers overwrite
// individual pairs by left-member label.
std::vector<PairRatio> zero_pairs() {
    std::vector<PairRatio> out;
    for (const auto& [l, r] : MontageMap::standard19().mirror_pairs())
        out.push_back({l, r, 0.0, false});
    return out;
}

void set_pair(std::vector<PairRatio>& pairs, const std::string& left, double value) {
    for (auto& p : pairs)
        if (p.left == left) {
            p.value = value;
            return;
        }
    FAIL("no pair with left member ", left);
}

}  // namespace

TEST_CASE("GBS rule") {
    SUBCASE("both PDRs below 7.5") { CHECK(detect_gbs(7.0, 7.2, 40.0)); }
    SUBCASE("both below 8 with slow ratio above 50") { CHECK(detect_gbs(7.8, 7.9, 55.0)); }
    SUBCASE("neither criterion") { CHECK_FALSE(detect_gbs(9.5, 9.4, 45.0)); }
    SUBCASE("missing PDR is an error") {
        CHECK_THROWS_AS(detect_gbs(std::nan(""), 9.0, 40.0), DomainError);
    }
    SUBCASE("full truth table over the criterion combinations") {
        struct Row {
            double l, r, slow;
            bool expect;
        };
        // (both<7.5, both<8, slow>50) -> outcome; PDR values realize each
        // reachable combination, including mixed hemispheres.
        const Row rows[] = {
            {7.0, 7.0, 55.0, true},   // T T T
            {7.0, 7.0, 45.0, true},   // T T F (first criterion alone)
            {7.8, 7.9, 55.0, true},   // F T T (second criterion)
            {7.8, 7.9, 45.0, false},  // F T F
            {9.0, 9.0, 55.0, false},  // F F T
            {9.0, 9.0, 45.0, false},  // F F F
            {7.0, 7.9, 55.0, true},   // mixed: only the second criterion can fire
            {7.0, 9.9, 55.0, false},  // mixed: one hemisphere fast blocks both
        };
        for (const auto& row : rows)
            CHECK(detect_gbs(row.l, row.r, row.slow) == row.expect);
    }
    SUBCASE("monotonicity: lowering PDR or raising slow ratio never clears GBS") {
        std::uint64_t state = 31;
        for (int i = 0; i < 300; ++i) {
            double l = 4.0 + 8.0 * test::unit(state);
            double r = 4.0 + 8.0 * test::unit(state);
            double s = 100.0 * test::unit(state);
            bool base = detect_gbs(l, r, s);
            if (!base) continue;
            CHECK(detect_gbs(l - 0.5, r, s));
            CHECK(detect_gbs(l, r - 0.5, s));
            CHECK(detect_gbs(l, r, std::min(100.0, s + 5.0)));
        }
    }
}

TEST_CASE("alpha amplitude score hand traces") {
    SUBCASE("scores 0.6 / 0.7 stay symmetric") {
        auto pairs = zero_pairs();
        set_pair(pairs, "F7", 0.6);
        set_pair(pairs, "T3", -0.7);
        set_pair(pairs, "C3", 0.4);  // below the 0.5 bound, ignored
        auto r = alpha_amplitude_score(pairs, {});
        CHECK(r.score_left == doctest::Approx(0.6));
        CHECK(r.score_right == doctest::Approx(0.7));
        CHECK_FALSE(r.asymmetric);
    }
    SUBCASE("0.9 + 0.8 crosses 1.6 and is asymmetric") {
        auto pairs = zero_pairs();
        set_pair(pairs, "F7", 0.9);
        set_pair(pairs, "F3", 0.8);
        auto r = alpha_amplitude_score(pairs, {});
        CHECK(r.score_left == doctest::Approx(1.7));
        CHECK(r.asymmetric);
        CHECK(r.lower_right_electrodes == std::vector<std::string>{"F8", "F4"});
    }
    SUBCASE("all zeros stay symmetric") {
        auto r = alpha_amplitude_score(zero_pairs(), {});
        CHECK(r.score_left == 0.0);
        CHECK(r.score_right == 0.0);
        CHECK_FALSE(r.asymmetric);
    }
    SUBCASE("artifact electrodes drop their pair") {
        auto pairs = zero_pairs();
        set_pair(pairs, "F7", 0.9);
        set_pair(pairs, "F3", 0.8);
        auto r = alpha_amplitude_score(pairs, {"F4"});
        CHECK(r.score_left == doctest::Approx(0.9));
        CHECK_FALSE(r.asymmetric);
    }
    SUBCASE("frontopolar pair is not an indicator") {
        auto pairs = zero_pairs();
        set_pair(pairs, "Fp1", 1.9);
        auto r = alpha_amplitude_score(pairs, {});
        CHECK(r.score_left == 0.0);
    }
}

TEST_CASE("asymmetry detection and reason labels") {
    AlphaScoreResult quiet;
    SUBCASE("PDR difference rule") {
        auto r = detect_asymmetry(9.5, 8.3, quiet);
        CHECK(r.asymmetric);
        CHECK(r.reason == "pdr_diff");
    }
    SUBCASE("amplitude rule") {
        AlphaScoreResult loud;
        loud.asymmetric = true;
        loud.score_right = 1.7;
        auto r = detect_asymmetry(9.0, 9.0, loud);
        CHECK(r.asymmetric);
        CHECK(r.reason == "amplitude");
    }
    SUBCASE("pdr_diff wins the label when both fire") {
        AlphaScoreResult loud;
        loud.asymmetric = true;
        auto r = detect_asymmetry(10.0, 8.0, loud);
        CHECK(r.reason == "pdr_diff");
    }
    SUBCASE("symmetric case") {
        auto r = detect_asymmetry(9.0, 9.0, quiet);
        CHECK_FALSE(r.asymmetric);
        CHECK(r.reason.empty());
    }
}

TEST_CASE("focal slow waves hand traces") {
    const auto& montage = MontageMap::standard19();

    SUBCASE("2.4 boundary case is NOT focal; adding F7 makes it focal") {
        auto theta = zero_pairs(), delta = zero_pairs();
        set_pair(theta, "T3", 0.8);
        set_pair(theta, "T5", 0.7);
        set_pair(delta, "C3", 0.9);
        auto r = focal_slow(theta, delta, {}, montage);
        CHECK(r.score_left == doctest::Approx(2.4));
        CHECK_FALSE(r.focal);  // strictly-greater bound
        CHECK(r.abnormal_electrodes.empty());

        set_pair(theta, "F7", 0.6);
        auto r2 = focal_slow(theta, delta, {}, montage);
        CHECK(r2.score_left == doctest::Approx(3.0));
        CHECK(r2.focal);
        CHECK(r2.abnormal_electrodes == std::vector<std::string>{"F7", "C3", "T3", "T5"});
    }
    SUBCASE("isolated electrode with no qualifying neighbor is not abnormal") {
        auto theta = zero_pairs(), delta = zero_pairs();
        set_pair(theta, "O1", 1.5);
        auto r = focal_slow(theta, delta, {}, montage);
        CHECK(r.score_left == 0.0);
        CHECK_FALSE(r.focal);
        CHECK(r.abnormal_electrodes.empty());
    }
    SUBCASE("all zero ratios are not focal") {
        auto r = focal_slow(zero_pairs(), zero_pairs(), {}, montage);
        CHECK_FALSE(r.focal);
    }
    SUBCASE("right-sided ratios accumulate on the right with right electrodes") {
        auto theta = zero_pairs(), delta = zero_pairs();
        set_pair(theta, "T3", -0.9);
        set_pair(theta, "T5", -0.9);
        set_pair(delta, "T3", -0.8);
        auto r = focal_slow(theta, delta, {}, montage);
        CHECK(r.score_right == doctest::Approx(2.6));
        CHECK(r.focal);
        CHECK(r.abnormal_electrodes == std::vector<std::string>{"T4", "T6"});
    }
    SUBCASE("artifact electrodes are excluded from candidacy and support") {
        auto theta = zero_pairs(), delta = zero_pairs();
        set_pair(theta, "T3", 0.9);
        set_pair(theta, "T5", 0.9);
        set_pair(delta, "C3", 0.9);
        auto with = focal_slow(theta, delta, {}, montage);
        REQUIRE(with.focal);
        // Marking T5/T6 bad removes its contribution and its support of T3.
        auto without = focal_slow(theta, delta, {"T6"}, montage);
        CHECK(without.score_left <= with.score_left);
    }
}

TEST_CASE("algorithm scores are invariant to power scaling and mirror-symmetric") {
    const auto& montage = MontageMap::standard19();
    std::uint64_t state = 41;
    for (int rep = 0; rep < 100; ++rep) {
        auto theta = zero_pairs(), delta = zero_pairs(), alpha = zero_pairs();
        for (auto* pairs : {&theta, &delta, &alpha})
            for (auto& p : *pairs) p.value = 2.0 * test::unit(state) - 1.0;

        // Mirror: negate every ratio; scores must swap exactly.
        auto negate = [](std::vector<PairRatio> v) {
            for (auto& p : v) p.value = -p.value;
            return v;
        };
        auto a1 = alpha_amplitude_score(alpha, {});
        auto a2 = alpha_amplitude_score(negate(alpha), {});
        CHECK(a1.score_left == doctest::Approx(a2.score_right).epsilon(1e-12));
        CHECK(a1.score_right == doctest::Approx(a2.score_left).epsilon(1e-12));

        auto f1 = focal_slow(theta, delta, {}, montage);
        auto f2 = focal_slow(negate(theta), negate(delta), {}, montage);
        CHECK(f1.score_left == doctest::Approx(f2.score_right).epsilon(1e-12));
        CHECK(f1.score_right == doctest::Approx(f2.score_left).epsilon(1e-12));

        // Adding an artifact electrode never raises a score.
        auto f3 = focal_slow(theta, delta, {"T3"}, montage);
        CHECK(f3.score_left <= f1.score_left + 1e-12);
        CHECK(f3.score_right <= f1.score_right + 1e-12);
        auto a3 = alpha_amplitude_score(alpha, {"F7"});
        CHECK(a3.score_left <= a1.score_left + 1e-12);
        CHECK(a3.score_right <= a1.score_right + 1e-12);
    }
}

TEST_CASE("assemble_findings bundles and echoes thresholds") {
    AbnormalityThresholds th;
    th.focal_score = 2.5;
    SUBCASE("all detectors false") {
        auto f = assemble_findings(false, {}, {}, {}, th);
        CHECK_FALSE(f.gbs);
        CHECK(f.focal_electrodes.empty());
        CHECK(f.thresholds_used.focal_score == 2.5);
    }
    SUBCASE("focal electrodes pass through") {
        FocalSlowResult focal;
        focal.focal = true;
        focal.abnormal_electrodes = {"F8", "F4"};
        auto f = assemble_findings(false, {}, {}, focal, th);
        CHECK(f.focal_slow);
        CHECK(f.focal_electrodes == std::vector<std::string>{"F8", "F4"});
    }
}

TEST_CASE("region phrases") {
    const auto& montage = MontageMap::standard19();
    CHECK(region_phrase({"F8", "F4"}, montage) == "right frontotemporal region");
    CHECK(region_phrase({"T3", "T5"}, montage) == "left temporal region");
    CHECK(region_phrase({"O1", "O2"}, montage) == "bilateral occipital region");
    CHECK(region_phrase({"C3", "T3", "T5", "P3"}, montage) ==
          "left centro-temporo-parietal region");
    CHECK(region_phrase({}, montage).empty());
}
