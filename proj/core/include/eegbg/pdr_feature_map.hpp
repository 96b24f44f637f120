#pragma once

#include <string>
#include <vector>

#include "eegbg/spectral.hpp"

namespace eegbg {

enum class Side { Left, Right };

inline constexpr int kPdrMapRows = 6;
inline constexpr int kPdrMapCols = 48;           // 3.00 .. 14.75 Hz at 0.25 Hz
inline constexpr double kPdrMapFminHz = 3.0;
inline constexpr double kPdrLabelMinHz = 4.0;
inline constexpr double kPdrLabelMaxHz = 12.0;

// 6 x 48 x 1 posterior PSD image normalized to [0, 1] by its maximum. For the
// right-side map the electrode rows are [T6, O2, P4, T5, O1, P3]; the left
// map reverses the triples: [T5, O1, P3, T6, O2, P4].
struct PdrFeatureMap {
    Side side = Side::Right;
    std::vector<std::string> electrode_order;
    std::vector<std::vector<double>> values;  // [row][col]

    double at(int row, int col) const { return values[row][col]; }
};

// Builds the map from a recording-level PSD whose grid covers 3-14.75 Hz.
// Throws DomainError listing any posterior electrode that is missing or has
// no usable power (NaN). A zero PSD stays a zero map.
PdrFeatureMap build_feature_map(const PsdTable& psd, Side side);

// Label scaling between Hz in [4, 12] and the unit interval: u = (hz - 4) / 8.
double normalize_label(double hz);
double denormalize_label(double unit);

// Binary feature-map container: 16-byte header (u32 magic 'PDRF', rows, cols,
// channels) followed by row-major little-endian f32 values.
void save_feature_map(const PdrFeatureMap& map, const std::string& path);
PdrFeatureMap load_feature_map(const std::string& path);

}  // namespace eegbg
