#include "synth.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <numbers>
#include <random>
#include <stdexcept>

namespace eegbg::test {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string pad_field(const std::string& value, std::size_t width) {
    std::string out = value.substr(0, width);
    out.resize(width, ' ');
    return out;
}

std::string num_field(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

double unit(std::uint64_t& state) {
    // splitmix64
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

Recording make_recording(double fs, double duration_s,
                         const std::map<std::string, std::vector<Tone>>& tones,
                         double noise_sigma_uv, std::uint64_t seed,
                         std::vector<std::string> channels) {
    if (channels.empty()) channels = MontageMap::standard19().analysis_channels();
    Recording rec;
    rec.fs = fs;
    rec.channels = channels;
    const std::size_t n = static_cast<std::size_t>(duration_s * fs);
    std::uint64_t state = seed;

    for (const auto& ch : channels) {
        std::vector<double> x(n, 0.0);
        auto it = tones.find(ch);
        if (it != tones.end()) {
            for (const auto& tone : it->second)
                for (std::size_t t = 0; t < n; ++t)
                    x[t] += tone.amplitude_uv *
                            std::sin(kTwoPi * tone.freq_hz * static_cast<double>(t) / fs +
                                     tone.phase);
        }
        if (noise_sigma_uv > 0) {
            for (std::size_t t = 0; t < n; ++t) {
                // Box-Muller from the deterministic stream.
                double u1 = std::max(unit(state), 1e-12), u2 = unit(state);
                x[t] += noise_sigma_uv * std::sqrt(-2.0 * std::log(u1)) *
                        std::cos(kTwoPi * u2);
            }
        }
        rec.data.push_back(std::move(x));
    }
    return rec;
}

void add_square_pulses(Recording& rec, const std::string& channel, double amplitude_uv,
                       double period_s, double from_s, double to_s) {
    int c = rec.channel_index(channel);
    if (c < 0) throw std::runtime_error("add_square_pulses: no channel " + channel);
    const std::size_t a = static_cast<std::size_t>(from_s * rec.fs);
    const std::size_t b = std::min(rec.n_samples(), static_cast<std::size_t>(to_s * rec.fs));
    for (std::size_t t = a; t < b; ++t) {
        double phase = std::fmod(static_cast<double>(t) / rec.fs, period_s) / period_s;
        rec.data[c][t] += phase < 0.5 ? amplitude_uv : -amplitude_uv;
    }
}

std::vector<double> oracle_multitaper_psd(const std::vector<double>& samples, double fs,
                                          double time_bandwidth, int n_tapers) {
    const int n = static_cast<int>(samples.size());
    const auto& tapers = dpss_tapers(n, time_bandwidth, n_tapers);
    double mean = 0;
    for (double v : samples) mean += v;
    mean /= n;

    const int n_freqs = n / 2 + 1;
    std::vector<double> acc(static_cast<std::size_t>(n_freqs), 0.0);
    for (const auto& taper : tapers) {
        for (int j = 0; j < n_freqs; ++j) {
            double re = 0, im = 0;
            for (int t = 0; t < n; ++t) {
                double y = taper[t] * (samples[t] - mean);
                double ang = -kTwoPi * j * t / n;
                re += y * std::cos(ang);
                im += y * std::sin(ang);
            }
            acc[j] += re * re + im * im;
        }
    }
    for (int j = 0; j < n_freqs; ++j) {
        double s = acc[j] / (n_tapers * fs);
        if (j != 0 && !(n % 2 == 0 && j == n / 2)) s *= 2.0;
        acc[j] = s;
    }
    return acc;
}

void write_edf_fixture(const std::string& path, const std::vector<std::string>& channels,
                       int fs, const std::vector<std::vector<std::int16_t>>& digital,
                       double phys_min, double phys_max, bool override_n_records,
                       long n_records_value) {
    const long ns = static_cast<long>(channels.size());
    const long n_records = static_cast<long>(digital.front().size()) / fs;

    std::ofstream out(path, std::ios::binary);
    out << pad_field("0", 8) << pad_field("test patient", 80) << pad_field("test recording", 80)
        << pad_field("01.01.00", 8) << pad_field("00.00.00", 8)
        << pad_field(std::to_string(256 + ns * 256), 8) << pad_field("", 44)
        << pad_field(std::to_string(override_n_records ? n_records_value : n_records), 8)
        << pad_field("1", 8) << pad_field(std::to_string(ns), 4);
    for (const auto& c : channels) out << pad_field(c, 16);
    for (long i = 0; i < ns; ++i) out << pad_field("", 80);
    for (long i = 0; i < ns; ++i) out << pad_field("uV", 8);
    for (long i = 0; i < ns; ++i) out << pad_field(num_field(phys_min), 8);
    for (long i = 0; i < ns; ++i) out << pad_field(num_field(phys_max), 8);
    for (long i = 0; i < ns; ++i) out << pad_field("-32768", 8);
    for (long i = 0; i < ns; ++i) out << pad_field("32767", 8);
    for (long i = 0; i < ns; ++i) out << pad_field("", 80);
    for (long i = 0; i < ns; ++i) out << pad_field(std::to_string(fs), 8);
    for (long i = 0; i < ns; ++i) out << pad_field("", 32);

    for (long r = 0; r < n_records; ++r) {
        for (long c = 0; c < ns; ++c) {
            for (int k = 0; k < fs; ++k) {
                std::int16_t d = digital[c][static_cast<std::size_t>(r) * fs + k];
                out.write(reinterpret_cast<const char*>(&d), 2);
            }
        }
    }
}

std::vector<LabeledExample> make_pdr_corpus(std::size_t n_files, std::uint64_t seed) {
    std::vector<LabeledExample> out;
    std::uint64_t state = seed;
    for (std::size_t f = 0; f < n_files; ++f) {
        // Label on the 4..12 Hz ladder, 0.5 steps (17 values).
        const int step = static_cast<int>(unit(state) * 17.0);
        const double f0 = 4.0 + 0.5 * std::min(step, 16);
        const double sigma = 0.5 + 0.5 * unit(state);

        for (Side side : {Side::Left, Side::Right}) {
            PdrFeatureMap map;
            map.side = side;
            map.values.assign(kPdrMapRows, std::vector<double>(kPdrMapCols, 0.0));
            double max_v = 0;
            for (int r = 0; r < kPdrMapRows; ++r) {
                const double row_gain = 0.7 + 0.6 * unit(state);
                for (int c = 0; c < kPdrMapCols; ++c) {
                    const double fz = kPdrMapFminHz + 0.25 * c;
                    double bump = row_gain * std::exp(-(fz - f0) * (fz - f0) /
                                                      (2.0 * sigma * sigma));
                    double background = 0.35 / fz;  // 1/f floor
                    double noise = 0.04 * unit(state);
                    double v = bump + background + noise;
                    map.values[r][c] = v;
                    max_v = std::max(max_v, v);
                }
            }
            for (auto& row : map.values)
                for (auto& v : row) v /= max_v;

            LabeledExample ex;
            ex.features = std::move(map);
            ex.label_hz = f0;
            ex.group_key = "file" + std::to_string(f);
            out.push_back(std::move(ex));
        }
    }
    return out;
}

}  // namespace eegbg::test
