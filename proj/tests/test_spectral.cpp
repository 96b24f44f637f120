#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "eegbg/errors.hpp"
#include "eegbg/spectral.hpp"
#include "synth.hpp"

using namespace eegbg;

namespace {

std::vector<double> sinusoid(double freq, double amp, double fs, int n, double phase = 0) {
    std::vector<double> x(n);
    for (int t = 0; t < n; ++t)
        x[t] = amp * std::sin(2.0 * std::numbers::pi * freq * t / fs + phase);
    return x;
}

PsdTable flat_psd(const std::vector<std::string>& channels, double lo, double hi, double level) {
    PsdTable psd;
    psd.channels = channels;
    for (double f = lo; f <= hi + 1e-9; f += 0.25) psd.freqs.push_back(f);
    psd.power.assign(channels.size(), std::vector<double>(psd.freqs.size(), level));
    psd.n_tapers = 7;
    return psd;
}

PsdTable montage_psd(double lo, double hi) {
    return flat_psd(MontageMap::standard19().analysis_channels(), lo, hi, 0.0);
}

void set_band(PsdTable& psd, const std::string& channel, double lo, double hi, double level) {
    int c = psd.channel_index(channel);
    REQUIRE(c >= 0);
    for (std::size_t j = 0; j < psd.freqs.size(); ++j)
        if (psd.freqs[j] >= lo - 1e-9 && psd.freqs[j] <= hi + 1e-9) psd.power[c][j] = level;
}

}  // namespace

TEST_CASE("10 Hz sinusoid peaks exactly at 10.00 Hz and matches the DFT oracle") {
    const double fs = 125;
    const int n = 500;
    auto x = sinusoid(10.0, 20.0, fs, n);
    auto psd = multitaper_psd({x}, {"O1"}, fs, 1.5, 30.0);

    std::size_t argmax = 0;
    for (std::size_t j = 1; j < psd.freqs.size(); ++j)
        if (psd.power[0][j] > psd.power[0][argmax]) argmax = j;
    CHECK(psd.freqs[argmax] == doctest::Approx(10.0).epsilon(1e-12));

    auto oracle = test::oracle_multitaper_psd(x, fs, 4.0, 7);
    for (std::size_t j = 0; j < psd.freqs.size(); ++j) {
        std::size_t bin = static_cast<std::size_t>(std::lround(psd.freqs[j] / 0.25));
        CHECK(psd.power[0][j] == doctest::Approx(oracle[bin]).epsilon(1e-9));
    }
}

TEST_CASE("all-zero epoch gives an all-zero PSD") {
    auto psd = multitaper_psd({std::vector<double>(500, 0.0)}, {"O1"}, 125, 1.5, 30.0);
    for (double v : psd.power[0]) CHECK(v == 0.0);
}

TEST_CASE("Parseval: integrated PSD matches epoch variance within 5% (>=95/100 trials)") {
    const double fs = 125;
    const int n = 500;
    std::uint64_t state = 7;
    int pass = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(n);
        for (auto& v : x) {
            double u1 = std::max(test::unit(state), 1e-12), u2 = test::unit(state);
            v = 10.0 * std::sqrt(-2.0 * std::log(u1)) *
                std::cos(2.0 * std::numbers::pi * u2);
        }
        auto psd = multitaper_psd({x}, {"O1"}, fs, 0.0, fs / 2);
        double integral = 0;
        for (std::size_t j = 0; j + 1 < psd.freqs.size(); ++j)
            integral += 0.5 * (psd.power[0][j] + psd.power[0][j + 1]) * 0.25;
        double mean = 0;
        for (double v : x) mean += v;
        mean /= n;
        double var = 0;
        for (double v : x) var += (v - mean) * (v - mean);
        var /= n;
        if (std::abs(integral - var) / var <= 0.05) ++pass;
    }
    CHECK(pass >= 95);
}

TEST_CASE("multitaper precondition and band errors") {
    CHECK_THROWS_AS(multitaper_psd({std::vector<double>(500, 0.0)}, {"a"}, 125, 1.5, 80.0),
                    DomainError);
    CHECK_THROWS_WITH_AS(
        multitaper_psd({std::vector<double>(400, 0.0)}, {"a"}, 125, 1.5, 30.0),
        doctest::Contains("zero padding"), DomainError);
}

TEST_CASE("band_power rectangle and additivity cases") {
    auto psd = flat_psd({"C3"}, 1.5, 30.0, 1.0);
    CHECK(band_power(psd, 1.5, 30.0, {0}) == doctest::Approx(28.5));

    SUBCASE("band outside nonzero support") {
        auto zero = flat_psd({"C3"}, 1.5, 30.0, 0.0);
        set_band(zero, "C3", 1.5, 4.0, 2.0);
        CHECK(band_power(zero, 13.0, 30.0, {0}) == doctest::Approx(0.0));
    }
    SUBCASE("two channels add") {
        auto two = flat_psd({"C3", "C4"}, 1.5, 30.0, 1.0);
        CHECK(band_power(two, 8.0, 10.0, {0, 1}) == doctest::Approx(4.0));
    }
    SUBCASE("empty channel subset is an error") {
        CHECK_THROWS_AS(band_power(psd, 1.5, 30.0, {}), DomainError);
    }
    SUBCASE("adjacent bands sum to the full band") {
        std::uint64_t state = 3;
        auto rnd = flat_psd({"C3"}, 1.5, 30.0, 0.0);
        for (auto& v : rnd.power[0]) v = test::unit(state) * 5.0;
        double lohi = band_power(rnd, 1.5, 8.0, {0}) + band_power(rnd, 8.0, 30.0, {0});
        double full = band_power(rnd, 1.5, 30.0, {0});
        CHECK(lohi == doctest::Approx(full).epsilon(1e-6));
    }
}

TEST_CASE("ap_gradient ratios and errors") {
    const auto& montage = MontageMap::standard19();
    const std::vector<std::string> anterior{"Fp1", "Fp2", "F7", "F8", "F3", "F4"};
    const std::vector<std::string> posterior{"T5", "T6", "P3", "P4", "O1", "O2"};
    auto psd = montage_psd(1.5, 30.0);

    SUBCASE("equal anterior and posterior alpha gives 100%") {
        for (const auto& c : anterior) set_band(psd, c, 8, 13, 1.0);
        for (const auto& c : posterior) set_band(psd, c, 8, 13, 1.0);
        auto g = ap_gradient(psd, montage);
        CHECK(g.total == doctest::Approx(100.0));
        CHECK(g.left == doctest::Approx(100.0));
        CHECK(g.right == doctest::Approx(100.0));
    }
    SUBCASE("posterior double the anterior gives 50%") {
        for (const auto& c : anterior) set_band(psd, c, 8, 13, 1.0);
        for (const auto& c : posterior) set_band(psd, c, 8, 13, 2.0);
        CHECK(ap_gradient(psd, montage).total == doctest::Approx(50.0));
    }
    SUBCASE("anterior 3 over posterior 10 gives 30%, below the 40% bound") {
        for (const auto& c : anterior) set_band(psd, c, 8, 13, 3.0);
        for (const auto& c : posterior) set_band(psd, c, 8, 13, 10.0);
        auto g = ap_gradient(psd, montage);
        CHECK(g.total == doctest::Approx(30.0));
        CHECK(g.total < 40.0);
    }
    SUBCASE("zero posterior spectrum is degenerate") {
        for (const auto& c : anterior) set_band(psd, c, 8, 13, 1.0);
        CHECK_THROWS_WITH_AS(ap_gradient(psd, montage), doctest::Contains("degenerate"),
                             DomainError);
    }
    SUBCASE("scale invariance") {
        std::uint64_t state = 11;
        for (auto& ch : psd.power)
            for (auto& v : ch) v = 0.1 + test::unit(state);
        auto before = ap_gradient(psd, montage);
        for (auto& ch : psd.power)
            for (auto& v : ch) v *= 37.5;
        auto after = ap_gradient(psd, montage);
        CHECK(before.total == doctest::Approx(after.total).epsilon(1e-12));
        CHECK(before.left == doctest::Approx(after.left).epsilon(1e-12));
    }
}

TEST_CASE("slow_ratio length fractions") {
    const auto& montage = MontageMap::standard19();
    SUBCASE("all power below 8 Hz gives 100%") {
        auto psd = montage_psd(1.5, 30.0);
        for (const auto& c : psd.channels) set_band(psd, c, 1.5, 7.75, 1.0);
        CHECK(slow_ratio(psd, montage).total > 99.0);
    }
    SUBCASE("all power above 8 Hz gives ~0%") {
        auto psd = montage_psd(1.5, 30.0);
        for (const auto& c : psd.channels) set_band(psd, c, 8.25, 30.0, 1.0);
        CHECK(slow_ratio(psd, montage).total < 1.0);
    }
    SUBCASE("flat density gives the band-length fraction") {
        auto psd = montage_psd(1.5, 30.0);
        for (const auto& c : psd.channels) set_band(psd, c, 1.5, 30.0, 1.0);
        CHECK(slow_ratio(psd, montage).total == doctest::Approx(100.0 * 6.5 / 28.5));
    }
}

TEST_CASE("lr_band_ratio formula, antisymmetry and bounds") {
    const auto& montage = MontageMap::standard19();
    auto psd = montage_psd(1.5, 30.0);

    SUBCASE("equal powers give 0") {
        set_band(psd, "O1", 8, 13, 1.0);
        set_band(psd, "O2", 8, 13, 1.0);
        auto r = lr_band_ratio(psd, bands::alpha, montage);
        CHECK(r.per_pair.back().value == doctest::Approx(0.0));
    }
    SUBCASE("3 vs 1 gives 1.0") {
        set_band(psd, "O1", 8, 13, 3.0);
        set_band(psd, "O2", 8, 13, 1.0);
        auto r = lr_band_ratio(psd, bands::alpha, montage);
        CHECK(r.per_pair.back().left == "O1");
        CHECK(r.per_pair.back().value == doctest::Approx(1.0));
    }
    SUBCASE("degenerate pair flag") {
        auto r = lr_band_ratio(psd, bands::alpha, montage);
        CHECK(r.per_pair.front().degenerate);
        CHECK(r.per_pair.front().value == 0.0);
    }
    SUBCASE("hemisphere swap negates every value; all values bounded") {
        std::uint64_t state = 5;
        for (auto& ch : psd.power)
            for (auto& v : ch) v = test::unit(state);
        auto mirrored = psd;
        for (const auto& [l, r] : montage.mirror_pairs())
            std::swap(mirrored.power[psd.channel_index(l)],
                      mirrored.power[psd.channel_index(r)]);
        for (Band band : {bands::alpha, bands::theta, bands::delta}) {
            auto a = lr_band_ratio(psd, band, montage);
            auto b = lr_band_ratio(mirrored, band, montage);
            for (std::size_t i = 0; i < a.per_pair.size(); ++i) {
                CHECK(a.per_pair[i].value == doctest::Approx(-b.per_pair[i].value));
                CHECK(std::abs(a.per_pair[i].value) <= 2.0);
            }
            CHECK(a.hemispheric == doctest::Approx(-b.hemispheric));
        }
    }
}

TEST_CASE("band_amplitude peak-to-peak convention") {
    const double fs = 125;
    const auto channels = MontageMap::standard19().analysis_channels();

    SUBCASE("pure alpha sinusoid of amplitude A reports ~2A") {
        std::map<std::string, std::vector<test::Tone>> tones;
        for (const auto& c : channels) tones[c] = {{10.0, 30.0}};
        auto rec = test::make_recording(fs, 20.0, tones, 0.0, 1);
        auto es = segment_epochs(rec, 4.0);
        double amp = band_amplitude(es, bands::alpha);
        CHECK(amp == doctest::Approx(60.0).epsilon(0.10));
    }
    SUBCASE("zero signal reports 0 and doubling doubles") {
        std::map<std::string, std::vector<test::Tone>> tones;
        for (const auto& c : channels) tones[c] = {{6.0, 12.0}};
        auto rec = test::make_recording(fs, 12.0, tones, 0.0, 2);
        auto es = segment_epochs(rec, 4.0);
        double amp1 = band_amplitude(es, bands::theta);

        for (auto& ch : rec.data)
            for (auto& v : ch) v *= 2.0;
        auto es2 = segment_epochs(rec, 4.0);
        CHECK(band_amplitude(es2, bands::theta) == doctest::Approx(2.0 * amp1).epsilon(1e-9));

        auto zero = test::make_recording(fs, 12.0, {}, 0.0, 3);
        CHECK(band_amplitude(segment_epochs(zero, 4.0), bands::alpha) ==
              doctest::Approx(0.0));
    }
    SUBCASE("no included epochs is an error") {
        auto rec = test::make_recording(fs, 8.0, {}, 0.0, 4);
        auto es = segment_epochs(rec, 4.0);
        es.include_mask.assign(es.n_epochs(), 0);
        CHECK_THROWS_AS(band_amplitude(es, bands::alpha), DomainError);
    }
}

TEST_CASE("PSD grid step and non-negativity on a noisy recording") {
    auto rec = test::make_recording(125, 8.0, {}, 5.0, 9);
    auto es = segment_epochs(rec, 4.0);
    auto psds = epoch_psds(es, 1.5, 30.0);
    for (const auto& psd : psds) {
        for (std::size_t j = 1; j < psd.freqs.size(); ++j)
            CHECK(psd.freqs[j] - psd.freqs[j - 1] == doctest::Approx(0.25).epsilon(1e-12));
        for (const auto& ch : psd.power)
            for (double v : ch) CHECK(v >= 0.0);
    }
}
