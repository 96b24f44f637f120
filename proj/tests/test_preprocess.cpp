#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "eegbg/errors.hpp"
#include "eegbg/preprocess.hpp"
#include "synth.hpp"

using namespace eegbg;

namespace {

std::map<std::string, std::vector<test::Tone>> alpha_everywhere(double amp) {
    std::map<std::string, std::vector<test::Tone>> tones;
    for (const auto& c : MontageMap::standard19().analysis_channels())
        tones[c] = {{10.0, amp}};
    return tones;
}

}  // namespace

TEST_CASE("segment_epochs arithmetic") {
    SUBCASE("600 s at 125 Hz in 4 s epochs") {
        auto rec = test::make_recording(125, 600, {}, 0.0, 1, {"C3", "C4"});
        auto es = segment_epochs(rec, 4.0);
        CHECK(es.n_epochs() == 150);
        CHECK(es.samples_per_epoch() == 500);
        CHECK(es.n_included() == 150);
        CHECK(es.source_offsets_s[1] == doctest::Approx(4.0));
    }
    SUBCASE("3 s recording yields no epochs") {
        auto rec = test::make_recording(125, 3, {}, 0.0, 1, {"C3"});
        CHECK(segment_epochs(rec, 4.0).n_epochs() == 0);
    }
    SUBCASE("10.5 s recording drops the trailing 2.5 s") {
        auto rec = test::make_recording(125, 10.5, {}, 0.0, 1, {"C3"});
        auto es = segment_epochs(rec, 4.0);
        CHECK(es.n_epochs() == 2);
    }
    SUBCASE("non-integer samples per epoch is an error") {
        auto rec = test::make_recording(125, 10, {}, 0.0, 1, {"C3"});
        CHECK_THROWS_AS(segment_epochs(rec, 4.1), DomainError);  // 512.5 samples
    }
}

TEST_CASE("rereference schemes") {
    auto rec = test::make_recording(125, 4, alpha_everywhere(20.0), 1.0, 2);

    SUBCASE("average leaves zero channel mean per sample") {
        auto out = rereference(rec, ReferenceScheme::Average);
        for (std::size_t s = 0; s < out.n_samples(); s += 37) {
            double mean = 0;
            for (const auto& ch : out.data) mean += ch[s];
            CHECK(std::abs(mean / static_cast<double>(out.n_channels())) < 1e-9);
        }
    }
    SUBCASE("average is idempotent") {
        auto once = rereference(rec, ReferenceScheme::Average);
        auto twice = rereference(once, ReferenceScheme::Average);
        for (std::size_t c = 0; c < once.n_channels(); ++c)
            for (std::size_t s = 0; s < once.n_samples(); s += 61)
                CHECK(once.data[c][s] == doctest::Approx(twice.data[c][s]).epsilon(1e-12));
    }
    SUBCASE("rest with the identity matrix is the identity") {
        std::vector<std::vector<double>> eye(rec.n_channels(),
                                             std::vector<double>(rec.n_channels(), 0.0));
        for (std::size_t i = 0; i < rec.n_channels(); ++i) eye[i][i] = 1.0;
        auto out = rereference(rec, ReferenceScheme::Rest, &eye);
        CHECK(out.data == rec.data);
    }
    SUBCASE("rest dimension mismatch is an error") {
        std::vector<std::vector<double>> small(3, std::vector<double>(3, 0.0));
        CHECK_THROWS_AS(rereference(rec, ReferenceScheme::Rest, &small), DomainError);
    }
    SUBCASE("none is the identity") {
        auto out = rereference(rec, ReferenceScheme::None);
        CHECK(out.data == rec.data);
    }
}

TEST_CASE("transfer matrix file loading") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "eegbg_test_pre";
    fs::create_directories(dir);
    auto path = dir / "transfer.txt";
    {
        std::ofstream out(path);
        out << "1 0\n0.5 0.5\n";
    }
    auto m = load_transfer_matrix(path.string(), 2);
    CHECK(m[1][0] == doctest::Approx(0.5));
    CHECK_THROWS_AS(load_transfer_matrix(path.string(), 3), DomainError);
}

TEST_CASE("wake epoch selection rules") {
    const double fs = 125;

    SUBCASE("annotation rule excludes the epoch containing an eye event") {
        auto rec = test::make_recording(fs, 40, alpha_everywhere(20.0), 0.5, 3);
        rec.annotations = {{9.0, "Eye Close"}, {33.5, "photic stimulation"}};
        auto es = segment_epochs(rec, 4.0);
        auto psds = epoch_psds(es, 1.5, 30.0);
        auto res = select_wake_epochs(es, rec.annotations, psds);
        CHECK(res.include_mask[2] == 0);  // 9 s lies in epoch [8, 12)
        CHECK(res.excluded_by_annotation == 1);
        CHECK(res.include_mask[8] == 1);  // photic is not an eye event
    }
    SUBCASE("a 200 uV sample excludes its epoch") {
        auto rec = test::make_recording(fs, 40, alpha_everywhere(20.0), 0.5, 4);
        rec.data[3][static_cast<std::size_t>(18.0 * fs)] = 200.0;
        auto es = segment_epochs(rec, 4.0);
        auto psds = epoch_psds(es, 1.5, 30.0);
        auto res = select_wake_epochs(es, rec.annotations, psds);
        CHECK(res.include_mask[4] == 0);  // 18 s lies in epoch [16, 20)
        CHECK(res.excluded_by_amplitude == 1);
        std::size_t included = 0;
        for (auto b : res.include_mask) included += b;
        CHECK(included == es.n_epochs() - 1);
    }
    SUBCASE("delta-ratio outlier epoch is excluded (hand oracle)") {
        // One epoch gets a strong 2 Hz tone; every other epoch is plain alpha.
        auto rec = test::make_recording(fs, 80, alpha_everywhere(20.0), 0.5, 5);
        const std::size_t hot = 7;
        for (std::size_t c = 0; c < rec.n_channels(); ++c)
            for (std::size_t t = static_cast<std::size_t>(hot * 4 * fs);
                 t < static_cast<std::size_t>((hot + 1) * 4 * fs); ++t)
                rec.data[c][t] += 60.0 * std::sin(2.0 * 3.14159265358979 * 2.0 * t / fs);
        auto es = segment_epochs(rec, 4.0);
        auto psds = epoch_psds(es, 1.5, 30.0);

        // Independent oracle: recompute the delta ratios and the threshold.
        auto ratio_of = [&](std::size_t e) {
            double acc = 0;
            for (std::size_t c = 0; c < psds[e].channels.size(); ++c) {
                double tot = band_power(psds[e], bands::total, {static_cast<int>(c)});
                acc += band_power(psds[e], bands::delta, {static_cast<int>(c)}) / tot;
            }
            return acc / static_cast<double>(psds[e].channels.size());
        };
        std::vector<double> ratios;
        for (std::size_t e = 0; e < es.n_epochs(); ++e) ratios.push_back(ratio_of(e));
        // The hot epoch must sit 10 SD above the statistics of the others.
        double mean = 0;
        for (std::size_t e = 0; e < ratios.size(); ++e)
            if (e != hot) mean += ratios[e];
        mean /= static_cast<double>(ratios.size() - 1);
        double sd = 0;
        for (std::size_t e = 0; e < ratios.size(); ++e)
            if (e != hot) sd += (ratios[e] - mean) * (ratios[e] - mean);
        sd = std::sqrt(sd / static_cast<double>(ratios.size() - 1));
        REQUIRE(ratios[hot] > mean + 10.0 * sd);

        auto res = select_wake_epochs(es, rec.annotations, psds);
        CHECK(res.include_mask[hot] == 0);
        CHECK(res.excluded_by_band_ratio == 1);
        for (std::size_t e = 0; e < es.n_epochs(); ++e)
            if (e != hot) CHECK(res.include_mask[e] == 1);
    }
    SUBCASE("identical clean epochs are all kept") {
        auto rec = test::make_recording(fs, 40, alpha_everywhere(20.0), 0.0, 6);
        auto es = segment_epochs(rec, 4.0);
        auto psds = epoch_psds(es, 1.5, 30.0);
        auto res = select_wake_epochs(es, rec.annotations, psds);
        for (auto b : res.include_mask) CHECK(b == 1);
    }
    SUBCASE("excluded plus included counts sum to the epoch count") {
        auto rec = test::make_recording(fs, 60, alpha_everywhere(20.0), 2.0, 7);
        rec.data[0][100] = 400.0;
        rec.annotations = {{22.0, "eo"}};
        auto es = segment_epochs(rec, 4.0);
        auto psds = epoch_psds(es, 1.5, 30.0);
        auto res = select_wake_epochs(es, rec.annotations, psds);
        std::size_t included = 0;
        for (auto b : res.include_mask) included += b;
        std::size_t excluded = res.excluded_by_annotation + res.excluded_by_amplitude +
                               res.excluded_by_band_ratio;
        CHECK(included + excluded == es.n_epochs());
    }
}

TEST_CASE("concatenate_epochs rebuilds the analyzed span") {
    auto rec = test::make_recording(125, 10.5, alpha_everywhere(10.0), 1.0, 8);
    auto es = segment_epochs(rec, 4.0);
    auto rebuilt = concatenate_epochs(es, rec);
    CHECK(rebuilt.n_samples() == 2 * 500);
    for (std::size_t c = 0; c < rec.n_channels(); ++c)
        for (std::size_t t = 0; t < rebuilt.n_samples(); t += 97)
            CHECK(rebuilt.data[c][t] == rec.data[c][t]);
}
