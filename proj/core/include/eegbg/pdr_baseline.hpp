#pragma once

#include "eegbg/pdr_feature_map.hpp"

namespace eegbg {

// Model-free PDR estimate: for each of the 6 electrode rows, the
// power-weighted centroid of the 3-bin neighborhood around the row's argmax
// bin (ties break toward the lowest frequency, edge neighborhoods are
// clipped); the row estimates are averaged and clamped to [4, 12] Hz.
double spectral_peak_baseline(const PdrFeatureMap& map);

}  // namespace eegbg
