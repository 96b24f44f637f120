#include "eegbg/annotations.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "eegbg/errors.hpp"

namespace eegbg {

std::vector<Annotation> load_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open annotation file: " + path);

    std::vector<Annotation> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        std::string onset_text = tab == std::string::npos ? line : line.substr(0, tab);
        std::string label = tab == std::string::npos ? "" : line.substr(tab + 1);
        try {
            std::size_t pos = 0;
            double onset = std::stod(onset_text, &pos);
            if (pos != onset_text.size()) throw std::invalid_argument(onset_text);
            out.push_back({onset, label});
        } catch (const std::exception&) {
            throw ParseError("annotation file " + path + " line " + std::to_string(lineno) +
                             ": unparseable onset \"" + onset_text + "\"");
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Annotation& a, const Annotation& b) { return a.onset_s < b.onset_s; });
    return out;
}

std::vector<std::string> annotation_warnings(const std::vector<Annotation>& annotations,
                                             double duration_s) {
    std::vector<std::string> warnings;
    for (const auto& a : annotations) {
        if (a.onset_s < 0.0 || a.onset_s > duration_s) {
            std::ostringstream os;
            os << "annotation \"" << a.label << "\" at " << a.onset_s
               << " s lies outside the recording [0, " << duration_s << "]";
            warnings.push_back(os.str());
        }
    }
    return warnings;
}

}  // namespace eegbg
