#include "eegbg/montage.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <stdexcept>

#include "eegbg/errors.hpp"
#include "eegbg/recording.hpp"

namespace eegbg {

namespace {

std::string upper(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

MontageMap::MontageMap() {
    channels_ = {"Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T3", "C3", "Cz",
                 "C4",  "T4",  "T5", "P3", "Pz", "P4", "T6", "O1", "O2"};

    auto link = [this](const std::string& a, const std::string& b) {
        adjacency_[a].insert(b);
        adjacency_[b].insert(a);
    };
    // Anterior-posterior chains.
    link("Fp1", "F7"); link("F7", "T3"); link("T3", "T5"); link("T5", "O1");
    link("Fp2", "F8"); link("F8", "T4"); link("T4", "T6"); link("T6", "O2");
    link("Fp1", "F3"); link("F3", "C3"); link("C3", "P3"); link("P3", "O1");
    link("Fp2", "F4"); link("F4", "C4"); link("C4", "P4"); link("P4", "O2");
    // Same-row lateral links.
    link("Fp1", "Fp2");
    link("F7", "F3"); link("F4", "F8");
    link("T3", "C3"); link("C4", "T4");
    link("T5", "P3"); link("P4", "T6");
    link("O1", "O2");
    // Midline chain and polar caps.
    link("Fz", "Cz"); link("Cz", "Pz");
    link("Fz", "Fp1"); link("Fz", "Fp2");
    link("Pz", "O1"); link("Pz", "O2");

    pairs_ = {{"Fp1", "Fp2"}, {"F7", "F8"}, {"F3", "F4"}, {"T3", "T4"},
              {"C3", "C4"},   {"T5", "T6"}, {"P3", "P4"}, {"O1", "O2"}};
    for (const auto& [l, r] : pairs_) {
        hemisphere_[l] = Hemisphere::Left;
        hemisphere_[r] = Hemisphere::Right;
        mirror_[l] = r;
        mirror_[r] = l;
    }
    for (const auto& m : {"Fz", "Cz", "Pz"}) hemisphere_[m] = Hemisphere::Midline;
}

const MontageMap& MontageMap::standard19() {
    static const MontageMap instance;
    return instance;
}

const std::set<std::string>& MontageMap::neighbors(const std::string& channel) const {
    auto it = adjacency_.find(channel);
    if (it == adjacency_.end())
        throw std::out_of_range("montage: unknown channel " + channel);
    return it->second;
}

Hemisphere MontageMap::hemisphere(const std::string& channel) const {
    auto it = hemisphere_.find(channel);
    if (it == hemisphere_.end())
        throw std::out_of_range("montage: unknown channel " + channel);
    return it->second;
}

const std::string& MontageMap::mirror(const std::string& channel) const {
    auto it = mirror_.find(channel);
    if (it == mirror_.end())
        throw std::out_of_range("montage: channel has no mirror: " + channel);
    return it->second;
}

bool MontageMap::is_analysis_channel(const std::string& channel) const {
    return hemisphere_.count(channel) > 0;
}

std::string MontageMap::canonical_label(const std::string& raw) {
    static const std::map<std::string, std::string> table = [] {
        std::map<std::string, std::string> t;
        for (const auto& c : standard19().analysis_channels()) t[upper(c)] = c;
        t["T7"] = "T3";
        t["T8"] = "T4";
        t["P7"] = "T5";
        t["P8"] = "T6";
        return t;
    }();
    std::string key = upper(trim(raw));
    // Referential suffixes like "FP1-REF" or "EEG FP1" occur in clinical
    // exports; strip a leading "EEG " and anything from '-' on.
    if (key.rfind("EEG ", 0) == 0) key = key.substr(4);
    auto dash = key.find('-');
    if (dash != std::string::npos) key = trim(key.substr(0, dash));
    auto it = table.find(key);
    return it == table.end() ? std::string{} : it->second;
}

Recording apply_montage(const Recording& rec, const MontageMap& montage) {
    Recording out;
    out.fs = rec.fs;
    out.annotations = rec.annotations;

    std::vector<std::string> missing;
    for (const auto& want : montage.analysis_channels()) {
        int found = -1;
        for (std::size_t i = 0; i < rec.channels.size(); ++i) {
            if (MontageMap::canonical_label(rec.channels[i]) == want) {
                found = static_cast<int>(i);
                break;
            }
        }
        if (found < 0) {
            missing.push_back(want);
            continue;
        }
        out.channels.push_back(want);
        out.data.push_back(rec.data[found]);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw DomainError("montage: recording is missing analysis channels: " + list);
    }
    for (const auto& c : rec.channels)
        if (MontageMap::canonical_label(c).empty())
            std::cerr << "montage: dropping non-analysis channel '" << c << "'\n";
    return out;
}

Recording crop(const Recording& rec, double seconds) {
    if (seconds <= 0) throw DomainError("crop: seconds must be positive");
    std::size_t keep = static_cast<std::size_t>(seconds * rec.fs);
    if (keep >= rec.n_samples()) return rec;
    Recording out = rec;
    for (auto& ch : out.data) ch.resize(keep);
    return out;
}

}  // namespace eegbg
