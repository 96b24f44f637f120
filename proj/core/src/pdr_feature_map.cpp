#include "eegbg/pdr_feature_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "eegbg/errors.hpp"

namespace eegbg {

namespace {

constexpr std::uint32_t kMapMagic = 0x46524450;  // "PDRF"

const std::vector<std::string>& order_for(Side side) {
    static const std::vector<std::string> right{"T6", "O2", "P4", "T5", "O1", "P3"};
    static const std::vector<std::string> left{"T5", "O1", "P3", "T6", "O2", "P4"};
    return side == Side::Right ? right : left;
}

}  // namespace

PdrFeatureMap build_feature_map(const PsdTable& psd, Side side) {
    PdrFeatureMap map;
    map.side = side;
    map.electrode_order = order_for(side);

    const double step = psd.freq_step();
    if (psd.freqs.empty() || std::abs(step - 0.25) > 1e-9)
        throw DomainError("pdr map: PSD grid must use a 0.25 Hz step");
    double start = (kPdrMapFminHz - psd.freqs.front()) / 0.25;
    double rounded = std::round(start);
    if (std::abs(start - rounded) > 1e-6 || rounded < 0 ||
        rounded + kPdrMapCols > static_cast<double>(psd.freqs.size()))
        throw DomainError("pdr map: PSD grid must cover 3.00-14.75 Hz");
    const std::size_t j0 = static_cast<std::size_t>(rounded);

    std::vector<std::string> missing;
    map.values.assign(kPdrMapRows, std::vector<double>(kPdrMapCols, 0.0));
    double max_value = 0.0;
    for (int row = 0; row < kPdrMapRows; ++row) {
        int c = psd.channel_index(map.electrode_order[row]);
        if (c < 0) {
            missing.push_back(map.electrode_order[row]);
            continue;
        }
        for (int col = 0; col < kPdrMapCols; ++col) {
            double v = psd.power[c][j0 + col];
            if (std::isnan(v)) {
                missing.push_back(map.electrode_order[row]);
                break;
            }
            map.values[row][col] = v;
            max_value = std::max(max_value, v);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw DomainError("pdr map: posterior electrodes unusable without repair: " + list);
    }
    if (max_value > 0)
        for (auto& row : map.values)
            for (auto& v : row) v /= max_value;
    return map;
}

double normalize_label(double hz) {
    if (hz < kPdrLabelMinHz || hz > kPdrLabelMaxHz)
        throw DomainError("pdr label " + std::to_string(hz) + " Hz outside [4, 12]");
    return (hz - kPdrLabelMinHz) / (kPdrLabelMaxHz - kPdrLabelMinHz);
}

double denormalize_label(double unit) {
    return kPdrLabelMinHz + unit * (kPdrLabelMaxHz - kPdrLabelMinHz);
}

void save_feature_map(const PdrFeatureMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    std::uint32_t header[4] = {kMapMagic, kPdrMapRows, kPdrMapCols, 1};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    for (const auto& row : map.values) {
        for (double v : row) {
            float f = static_cast<float>(v);
            out.write(reinterpret_cast<const char*>(&f), sizeof(f));
        }
    }
    if (!out) throw ParseError("failed writing feature map to " + path);
}

PdrFeatureMap load_feature_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open feature map file: " + path);
    std::uint32_t header[4];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || header[0] != kMapMagic)
        throw ParseError("feature map file " + path + " has a bad magic number");
    if (header[1] != kPdrMapRows || header[2] != kPdrMapCols || header[3] != 1)
        throw ParseError("feature map file " + path + " has unexpected shape " +
                         std::to_string(header[1]) + "x" + std::to_string(header[2]) + "x" +
                         std::to_string(header[3]));
    PdrFeatureMap map;
    map.values.assign(kPdrMapRows, std::vector<double>(kPdrMapCols, 0.0));
    for (auto& row : map.values) {
        for (auto& v : row) {
            float f;
            in.read(reinterpret_cast<char*>(&f), sizeof(f));
            v = f;
        }
    }
    if (!in) throw ParseError("feature map file " + path + " is truncated");
    return map;
}

}  // namespace eegbg
