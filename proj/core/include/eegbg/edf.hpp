#pragma once

#include <string>

#include "eegbg/recording.hpp"

namespace eegbg {

// Reads a standard EDF file (16-bit samples, 256-byte header plus 256 bytes
// per signal) and converts every signal to physical units using the
// per-signal digital/physical calibration. Data records are concatenated in
// order. Signals whose sampling rate differs from the majority rate (e.g.
// "EDF Annotations") are dropped with a note on stderr.
//
// Throws ParseError for malformed headers (naming the offending field),
// CalibrationError for a zero physical range, and ParseError reporting
// expected vs actual byte counts for truncated data records.
Recording load_edf(const std::string& path);

// Writes the recording as an EDF file (one-second data records when the
// sample count allows, one single record otherwise) with the given physical
// calibration in uV. The defaults give a digital step of exactly 0.1 uV.
// Digital codes round-trip bit-exactly through load_edf for in-range values.
void save_edf(const Recording& rec, const std::string& path, double phys_min_uv = -3276.8,
              double phys_max_uv = 3276.7);

}  // namespace eegbg
