#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "eegbg/annotations.hpp"
#include "eegbg/edf.hpp"
#include "eegbg/errors.hpp"
#include "synth.hpp"

using namespace eegbg;
namespace fs = std::filesystem;

namespace {

fs::path tmp_path(const std::string& name) {
    auto dir = fs::temp_directory_path() / "eegbg_test_edf";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("ramp fixture loads with exact uV scaling") {
    const int fs = 125;
    std::vector<std::vector<std::int16_t>> digital(2, std::vector<std::int16_t>(fs));
    for (int t = 0; t < fs; ++t) {
        digital[0][t] = static_cast<std::int16_t>(t);
        digital[1][t] = static_cast<std::int16_t>(-t);
    }
    auto path = tmp_path("ramp.edf");
    test::write_edf_fixture(path.string(), {"C3", "C4"}, fs, digital, -3276.8, 3276.7);

    Recording rec = load_edf(path.string());
    REQUIRE(rec.n_channels() == 2);
    REQUIRE(rec.n_samples() == 125);
    CHECK(rec.fs == doctest::Approx(125.0));
    const double scale = (3276.7 - (-3276.8)) / 65535.0;
    for (int t = 0; t < fs; ++t) {
        CHECK(rec.data[0][t] == -3276.8 + (digital[0][t] + 32768) * scale);
        CHECK(rec.data[1][t] == -3276.8 + (digital[1][t] + 32768) * scale);
    }
}

TEST_CASE("negative record count is a parse error naming the field") {
    std::vector<std::vector<std::int16_t>> digital(1, std::vector<std::int16_t>(125, 0));
    auto path = tmp_path("neg_records.edf");
    test::write_edf_fixture(path.string(), {"C3"}, 125, digital, -3276.8, 3276.7,
                            /*override_n_records=*/true, -1);
    CHECK_THROWS_WITH_AS(load_edf(path.string()),
                         doctest::Contains("number of data records"), ParseError);
}

TEST_CASE("21-channel 600 s file has the forced duration and sample count") {
    const int fs = 125;
    const std::size_t n = 600 * fs;
    std::vector<std::string> channels = MontageMap::standard19().analysis_channels();
    channels.push_back("Fpz");
    channels.push_back("A1");
    std::vector<std::vector<std::int16_t>> digital(channels.size(),
                                                   std::vector<std::int16_t>(n, 7));
    auto path = tmp_path("long.edf");
    test::write_edf_fixture(path.string(), channels, fs, digital, -3276.8, 3276.7);

    Recording rec = load_edf(path.string());
    CHECK(rec.n_channels() == 21);
    CHECK(rec.n_samples() == 75000);
    CHECK(rec.duration_s() == doctest::Approx(600.0));
}

TEST_CASE("truncated data record reports expected vs actual byte counts") {
    std::vector<std::vector<std::int16_t>> digital(1, std::vector<std::int16_t>(250, 1));
    auto path = tmp_path("trunc.edf");
    test::write_edf_fixture(path.string(), {"C3"}, 125, digital, -3276.8, 3276.7);
    fs::resize_file(path, fs::file_size(path) - 100);
    CHECK_THROWS_WITH_AS(load_edf(path.string()), doctest::Contains("expected"), ParseError);
}

TEST_CASE("zero physical range is a calibration error") {
    std::vector<std::vector<std::int16_t>> digital(1, std::vector<std::int16_t>(125, 0));
    auto path = tmp_path("flat_range.edf");
    test::write_edf_fixture(path.string(), {"C3"}, 125, digital, 100.0, 100.0);
    CHECK_THROWS_AS(load_edf(path.string()), CalibrationError);
}

TEST_CASE("load then re-serialize reproduces digital codes bit-exactly") {
    const int fs = 125;
    std::vector<std::vector<std::int16_t>> digital(2, std::vector<std::int16_t>(3 * fs));
    std::uint64_t state = 42;
    for (auto& ch : digital)
        for (auto& d : ch)
            d = static_cast<std::int16_t>(test::unit(state) * 65535.0 - 32768.0);
    auto path = tmp_path("roundtrip.edf");
    test::write_edf_fixture(path.string(), {"C3", "C4"}, fs, digital, -3276.8, 3276.7);

    Recording rec = load_edf(path.string());
    auto path2 = tmp_path("roundtrip2.edf");
    save_edf(rec, path2.string());

    std::ifstream a(path, std::ios::binary), b(path2.string(), std::ios::binary);
    a.seekg(256 + 2 * 256);
    b.seekg(256 + 2 * 256);
    std::vector<char> bytes_a((std::istreambuf_iterator<char>(a)), {});
    std::vector<char> bytes_b((std::istreambuf_iterator<char>(b)), {});
    REQUIRE(bytes_a.size() == bytes_b.size());
    CHECK(bytes_a == bytes_b);
}

TEST_CASE("annotation sidecar parsing") {
    auto path = tmp_path("ann.txt");

    SUBCASE("single line") {
        std::ofstream(path) << "12.5\teye close\n";
        auto anns = load_annotations(path.string());
        REQUIRE(anns.size() == 1);
        CHECK(anns[0].onset_s == doctest::Approx(12.5));
        CHECK(anns[0].label == "eye close");
    }
    SUBCASE("empty file yields empty list") {
        std::ofstream(path) << "";
        CHECK(load_annotations(path.string()).empty());
    }
    SUBCASE("out-of-order lines come back sorted") {
        std::ofstream(path) << "40\tphotic\n5\teye open\n20\teye close\n";
        auto anns = load_annotations(path.string());
        REQUIRE(anns.size() == 3);
        CHECK(anns[0].onset_s == 5);
        CHECK(anns[1].onset_s == 20);
        CHECK(anns[2].onset_s == 40);
    }
    SUBCASE("unparseable onset reports the line number") {
        std::ofstream(path) << "1.0\tok\nnot_a_number\tbad\n";
        CHECK_THROWS_WITH_AS(load_annotations(path.string()), doctest::Contains("line 2"),
                             ParseError);
    }
    SUBCASE("onsets outside the recording produce warnings") {
        std::vector<Annotation> anns{{-1.0, "early"}, {5.0, "fine"}, {700.0, "late"}};
        auto warnings = annotation_warnings(anns, 600.0);
        CHECK(warnings.size() == 2);
    }
}

TEST_CASE("montage application") {
    const auto& montage = MontageMap::standard19();
    auto rec = test::make_recording(125, 4, {}, 0.0, 1);

    SUBCASE("extra channels are dropped, 19 canonical remain") {
        rec.channels.push_back("Fpz");
        rec.data.push_back(std::vector<double>(rec.n_samples(), 0.0));
        rec.channels.push_back("A1");
        rec.data.push_back(std::vector<double>(rec.n_samples(), 0.0));
        auto out = apply_montage(rec, montage);
        CHECK(out.n_channels() == 19);
        CHECK(out.channels == montage.analysis_channels());
    }
    SUBCASE("T7 alias maps to T3") {
        rec.channels[rec.channel_index("T3")] = "T7";
        auto out = apply_montage(rec, montage);
        CHECK(out.channels[7] == "T3");
    }
    SUBCASE("missing channel error names it") {
        rec.channels[rec.channel_index("O2")] = "X99";
        CHECK_THROWS_WITH_AS(apply_montage(rec, montage), doctest::Contains("O2"), DomainError);
    }
    SUBCASE("idempotent") {
        auto once = apply_montage(rec, montage);
        auto twice = apply_montage(once, montage);
        CHECK(once.channels == twice.channels);
        CHECK(once.data == twice.data);
    }
}

TEST_CASE("montage invariants") {
    const auto& m = MontageMap::standard19();
    for (const auto& c : m.analysis_channels()) {
        CHECK(m.neighbors(c).size() >= 2);
        for (const auto& nb : m.neighbors(c)) CHECK(m.neighbors(nb).count(c) == 1);
    }
    // The published neighbor example.
    CHECK(m.neighbors("F3") == std::set<std::string>{"Fp1", "F7", "C3"});
    for (const auto& [l, r] : m.mirror_pairs()) {
        CHECK(m.hemisphere(l) == Hemisphere::Left);
        CHECK(m.hemisphere(r) == Hemisphere::Right);
        CHECK(m.mirror(l) == r);
    }
}
