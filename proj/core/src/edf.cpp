#include "eegbg/edf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "eegbg/errors.hpp"

namespace eegbg {

namespace {

struct SignalHeader {
    std::string label;
    std::string phys_dim;
    double phys_min = 0, phys_max = 0;
    int dig_min = 0, dig_max = 0;
    int samples_per_record = 0;
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string read_field(std::istream& in, std::size_t width, const char* field) {
    std::string buf(width, '\0');
    in.read(buf.data(), static_cast<std::streamsize>(width));
    if (in.gcount() != static_cast<std::streamsize>(width))
        throw ParseError(std::string("EDF header truncated while reading field '") +
                         field + "'");
    return buf;
}

double parse_double(const std::string& raw, const char* field) {
    std::string s = trim(raw);
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("EDF header field '") + field +
                         "' is not a number: \"" + s + "\"");
    }
}

long parse_long(const std::string& raw, const char* field) {
    std::string s = trim(raw);
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("EDF header field '") + field +
                         "' is not an integer: \"" + s + "\"");
    }
}

std::string fixed_field(const std::string& value, std::size_t width) {
    std::string out = value.substr(0, width);
    out.resize(width, ' ');
    return out;
}

std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

double unit_scale(const std::string& dim) {
    std::string d = trim(dim);
    std::transform(d.begin(), d.end(), d.begin(), ::tolower);
    if (d == "uv" || d == "\xc2\xb5v" || d.empty()) return 1.0;
    if (d == "mv") return 1000.0;
    if (d == "v") return 1e6;
    return 1.0;  // unknown dimensions pass through unscaled
}

}  // namespace

Recording load_edf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open EDF file: " + path);

    read_field(in, 8, "version");
    read_field(in, 80, "patient identification");
    read_field(in, 80, "recording identification");
    read_field(in, 8, "start date");
    read_field(in, 8, "start time");
    const long header_bytes = parse_long(read_field(in, 8, "header bytes"), "header bytes");
    read_field(in, 44, "reserved");
    const long n_records =
        parse_long(read_field(in, 8, "number of data records"), "number of data records");
    if (n_records < 0)
        throw ParseError("EDF header field 'number of data records' is negative (" +
                         std::to_string(n_records) + "); unknown-length files are not supported");
    const double record_dur =
        parse_double(read_field(in, 8, "data record duration"), "data record duration");
    if (record_dur <= 0)
        throw ParseError("EDF header field 'data record duration' must be positive");
    const long ns = parse_long(read_field(in, 4, "number of signals"), "number of signals");
    if (ns <= 0) throw ParseError("EDF header field 'number of signals' must be positive");
    if (header_bytes != 256 + ns * 256)
        throw ParseError("EDF header field 'header bytes' is " + std::to_string(header_bytes) +
                         ", expected " + std::to_string(256 + ns * 256));

    std::vector<SignalHeader> sig(static_cast<std::size_t>(ns));
    for (auto& s : sig) s.label = trim(read_field(in, 16, "signal label"));
    for (long i = 0; i < ns; ++i) read_field(in, 80, "transducer type");
    for (auto& s : sig) s.phys_dim = trim(read_field(in, 8, "physical dimension"));
    for (auto& s : sig) s.phys_min = parse_double(read_field(in, 8, "physical minimum"), "physical minimum");
    for (auto& s : sig) s.phys_max = parse_double(read_field(in, 8, "physical maximum"), "physical maximum");
    for (auto& s : sig)
        s.dig_min = static_cast<int>(parse_long(read_field(in, 8, "digital minimum"), "digital minimum"));
    for (auto& s : sig)
        s.dig_max = static_cast<int>(parse_long(read_field(in, 8, "digital maximum"), "digital maximum"));
    for (long i = 0; i < ns; ++i) read_field(in, 80, "prefiltering");
    for (auto& s : sig)
        s.samples_per_record = static_cast<int>(
            parse_long(read_field(in, 8, "samples per record"), "samples per record"));
    for (long i = 0; i < ns; ++i) read_field(in, 32, "signal reserved");

    for (const auto& s : sig) {
        if (s.samples_per_record <= 0)
            throw ParseError("EDF signal '" + s.label + "': field 'samples per record' must be positive");
        if (s.dig_max == s.dig_min)
            throw ParseError("EDF signal '" + s.label + "': digital range is empty");
        if (s.phys_max == s.phys_min)
            throw CalibrationError("EDF signal '" + s.label + "': zero physical range");
    }

    // Keep signals at the majority sampling rate; annotation/status signals
    // and odd-rate auxiliary channels are dropped.
    std::map<int, int> rate_votes;
    for (const auto& s : sig)
        if (s.label != "EDF Annotations") rate_votes[s.samples_per_record]++;
    if (rate_votes.empty()) throw ParseError("EDF file contains no signal data");
    int majority_spr = std::max_element(rate_votes.begin(), rate_votes.end(),
                                        [](auto& a, auto& b) { return a.second < b.second; })
                           ->first;

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < sig.size(); ++i) {
        if (sig[i].label == "EDF Annotations" || sig[i].samples_per_record != majority_spr) {
            std::cerr << "edf: dropping signal '" << sig[i].label
                      << "' (sample rate differs from majority)\n";
            continue;
        }
        keep.push_back(i);
    }

    Recording rec;
    rec.fs = majority_spr / record_dur;
    for (auto i : keep) rec.channels.push_back(sig[i].label);
    rec.data.assign(keep.size(),
                    std::vector<double>(static_cast<std::size_t>(n_records) * majority_spr));

    std::size_t record_bytes = 0;
    for (const auto& s : sig) record_bytes += 2u * static_cast<std::size_t>(s.samples_per_record);
    std::vector<char> buf(record_bytes);

    for (long r = 0; r < n_records; ++r) {
        in.read(buf.data(), static_cast<std::streamsize>(record_bytes));
        if (in.gcount() != static_cast<std::streamsize>(record_bytes)) {
            std::size_t expected = 256 + 256 * static_cast<std::size_t>(ns) +
                                   record_bytes * static_cast<std::size_t>(n_records);
            std::size_t actual = 256 + 256 * static_cast<std::size_t>(ns) +
                                 record_bytes * static_cast<std::size_t>(r) +
                                 static_cast<std::size_t>(in.gcount());
            throw ParseError("EDF data truncated in record " + std::to_string(r) +
                             ": expected " + std::to_string(expected) + " bytes total, got " +
                             std::to_string(actual));
        }
        std::size_t offset = 0;
        std::size_t out_ch = 0;
        for (std::size_t i = 0; i < sig.size(); ++i) {
            const auto& s = sig[i];
            bool kept = out_ch < keep.size() && keep[out_ch] == i;
            if (kept) {
                double scale = (s.phys_max - s.phys_min) / (s.dig_max - s.dig_min);
                double units = unit_scale(s.phys_dim);
                auto& dst = rec.data[out_ch];
                std::size_t base = static_cast<std::size_t>(r) * majority_spr;
                for (int k = 0; k < s.samples_per_record; ++k) {
                    int16_t d;
                    std::memcpy(&d, buf.data() + offset + 2u * k, 2);
                    dst[base + k] = (s.phys_min + (d - s.dig_min) * scale) * units;
                }
                ++out_ch;
            }
            offset += 2u * static_cast<std::size_t>(s.samples_per_record);
        }
    }
    return rec;
}

void save_edf(const Recording& rec, const std::string& path, double phys_min_uv,
              double phys_max_uv) {
    if (rec.n_channels() == 0) throw DomainError("save_edf: recording has no channels");
    if (phys_max_uv <= phys_min_uv) throw DomainError("save_edf: empty physical range");

    // One-second records when the sample count allows it, one single record
    // otherwise (keeps arbitrary durations exact).
    const std::size_t n_samples = rec.n_samples();
    long spr, n_records;
    double record_dur;
    double fs_int;
    if (std::modf(rec.fs, &fs_int) == 0.0 && n_samples % static_cast<std::size_t>(rec.fs) == 0) {
        spr = static_cast<long>(rec.fs);
        n_records = static_cast<long>(n_samples) / spr;
        record_dur = 1.0;
    } else {
        spr = static_cast<long>(n_samples);
        n_records = 1;
        record_dur = static_cast<double>(n_samples) / rec.fs;
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);

    const long ns = static_cast<long>(rec.n_channels());
    out << fixed_field("0", 8);
    out << fixed_field("X X X X", 80);
    out << fixed_field("Startdate 01-JAN-2000 X X X", 80);
    out << fixed_field("01.01.00", 8);
    out << fixed_field("00.00.00", 8);
    out << fixed_field(std::to_string(256 + ns * 256), 8);
    out << fixed_field("", 44);
    out << fixed_field(std::to_string(n_records), 8);
    out << fixed_field(format_number(record_dur), 8);
    out << fixed_field(std::to_string(ns), 4);

    const double phys_min = phys_min_uv, phys_max = phys_max_uv;
    const int dig_min = -32768, dig_max = 32767;
    for (const auto& c : rec.channels) out << fixed_field(c, 16);
    for (long i = 0; i < ns; ++i) out << fixed_field("", 80);
    for (long i = 0; i < ns; ++i) out << fixed_field("uV", 8);
    for (long i = 0; i < ns; ++i) out << fixed_field(format_number(phys_min), 8);
    for (long i = 0; i < ns; ++i) out << fixed_field(format_number(phys_max), 8);
    for (long i = 0; i < ns; ++i) out << fixed_field(std::to_string(dig_min), 8);
    for (long i = 0; i < ns; ++i) out << fixed_field(std::to_string(dig_max), 8);
    for (long i = 0; i < ns; ++i) out << fixed_field("", 80);
    for (long i = 0; i < ns; ++i) out << fixed_field(std::to_string(spr), 8);
    for (long i = 0; i < ns; ++i) out << fixed_field("", 32);

    const double scale = (phys_max - phys_min) / (dig_max - dig_min);
    std::vector<char> buf(2u * static_cast<std::size_t>(spr));
    for (long r = 0; r < n_records; ++r) {
        for (std::size_t c = 0; c < rec.n_channels(); ++c) {
            for (long k = 0; k < spr; ++k) {
                double v = rec.data[c][static_cast<std::size_t>(r) * spr + k];
                long d = std::lround((v - phys_min) / scale) + dig_min;
                d = std::clamp(d, static_cast<long>(dig_min), static_cast<long>(dig_max));
                int16_t d16 = static_cast<int16_t>(d);
                std::memcpy(buf.data() + 2u * k, &d16, 2);
            }
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        }
    }
    if (!out) throw ParseError("failed writing EDF data to " + path);
}

}  // namespace eegbg
