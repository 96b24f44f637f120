#pragma once

namespace eegbg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace eegbg
