#pragma once

#include <string>
#include <vector>

#include "eegbg/recording.hpp"

namespace eegbg {

// Parses a sidecar annotation file: UTF-8 text, one `onset_seconds<TAB>label`
// per line. Returns annotations sorted ascending by onset with labels kept
// verbatim. An empty file yields an empty list. Throws ParseError with the
// line number for an unparseable onset.
std::vector<Annotation> load_annotations(const std::string& path);

// Onsets outside [0, duration_s] are legal but suspicious; returns a warning
// string per offending annotation.
std::vector<std::string> annotation_warnings(const std::vector<Annotation>& annotations,
                                             double duration_s);

}  // namespace eegbg
