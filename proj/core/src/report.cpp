#include "eegbg/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eegbg/errors.hpp"
#include "eegbg/prompt_templates.hpp"
#include "eegbg/util.hpp"

namespace eegbg {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string join_channels(const std::vector<std::string>& channels) {
    std::string out;
    for (const auto& c : channels) out += (out.empty() ? "" : ", ") + c;
    return out;
}

std::string format_hz(double hz) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(1);
    os << hz;
    return os.str();
}

std::string replace_placeholder(std::string text, const std::string& placeholder,
                                const std::string& value) {
    auto pos = text.find(placeholder);
    if (pos == std::string::npos)
        throw DomainError("prompt template is missing placeholder " + placeholder);
    return text.replace(pos, placeholder.size(), value);
}

}  // namespace

std::string ReportFeatures::to_json() const {
    ordered_json j;
    j["EEG_quality"] = eeg_quality;
    j["bad_channels"] = bad_channels;
    j["backgroundFrequency"] = background_frequency;
    j["bg_active"] = bg_active;
    j["bg_amp"] = bg_amp;
    j["bg_amp_sym"] = bg_amp_sym;
    j["bg_freq"] = bg_freq;
    j["abnormalFindings"] = abnormal_findings;
    return j.dump(2) + "\n";
}

ReportFeatures ReportFeatures::from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report features: invalid JSON: ") + e.what());
    }
    static const std::vector<std::string> expected = {
        "EEG_quality", "bad_channels", "backgroundFrequency", "bg_active",
        "bg_amp",      "bg_amp_sym",   "bg_freq",             "abnormalFindings"};
    for (const auto& key : expected)
        if (!j.contains(key)) throw ParseError("report features: missing key " + key);
    if (j.size() != expected.size())
        throw ParseError("report features: unexpected extra keys (" +
                         std::to_string(j.size()) + " keys present)");
    ReportFeatures rf;
    rf.eeg_quality = j.at("EEG_quality").get<std::string>();
    rf.bad_channels = j.at("bad_channels").get<std::vector<std::string>>();
    rf.background_frequency = j.at("backgroundFrequency").get<std::string>();
    rf.bg_active = j.at("bg_active").get<std::string>();
    rf.bg_amp = j.at("bg_amp").get<std::string>();
    rf.bg_amp_sym = j.at("bg_amp_sym").get<std::string>();
    rf.bg_freq = j.at("bg_freq").get<std::string>();
    rf.abnormal_findings = j.at("abnormalFindings").get<std::vector<std::string>>();
    return rf;
}

ReportFeatures build_feature_json(const AbnormalityFindings& findings,
                                  const BackgroundFeatures& features,
                                  const MontageMap& montage) {
    ReportFeatures rf;

    const double survived = features.included_fraction();
    if (features.n_epochs_included < 10 || survived < 0.20)
        rf.eeg_quality = "Poor";
    else if (survived < 0.50)
        rf.eeg_quality = "Fair";
    else
        rf.eeg_quality = "Good";

    rf.bad_channels = features.bad_channels;
    rf.background_frequency = "Right: " + format_hz(features.pdr_right_hz) +
                              " Hz, Left: " + format_hz(features.pdr_left_hz) + " Hz";
    rf.bg_active = findings.gbs ? "Generalized background slowing" : "Normal background frequency";

    const double alpha_amp = features.band_amplitude_uv.count("alpha")
                                 ? features.band_amplitude_uv.at("alpha")
                                 : 0.0;
    if (alpha_amp < 10.0)
        rf.bg_amp = "low (<10 uV)";
    else if (alpha_amp <= 50.0)
        rf.bg_amp = "medium (10-50 uV)";
    else
        rf.bg_amp = "high (>50 uV)";

    if (findings.alpha.asymmetric) {
        rf.bg_amp_sym = findings.alpha.score_left >= findings.alpha.score_right
                            ? "lower in right"
                            : "lower in left";
    } else {
        rf.bg_amp_sym = "symmetric";
    }

    if (findings.asymmetry && findings.asymmetry_reason == "pdr_diff") {
        rf.bg_freq = features.pdr_left_hz < features.pdr_right_hz ? "asymmetric, slower in left"
                                                                  : "asymmetric, slower in right";
    } else {
        rf.bg_freq = "symmetric";
    }

    if (findings.gbs) rf.abnormal_findings.push_back("Generalized background slowing detected");
    if (findings.focal_slow || findings.asymmetry) {
        std::string entry = "Focal slow wave or asymmetric abnormality detected";
        if (findings.focal_slow) {
            entry += ";Focal slow waves in " + join_channels(findings.focal_electrodes) +
                     " channels (" + region_phrase(findings.focal_electrodes, montage) + ")";
        }
        if (findings.alpha.asymmetric) {
            const auto& lower = findings.alpha.score_left >= findings.alpha.score_right
                                    ? findings.alpha.lower_right_electrodes
                                    : findings.alpha.lower_left_electrodes;
            entry += ";Lower alpha amplitude in " + join_channels(lower) + " channels";
        }
        if (findings.asymmetry_reason == "pdr_diff")
            entry += ";PDR frequency difference greater than 1 Hz";
        rf.abnormal_findings.push_back(entry);
    }
    return rf;
}

std::string build_prompt(const ReportFeatures& rf) {
    return replace_placeholder(generate_prompt_template(), "{{FEATURES_JSON}}", rf.to_json());
}

bool validate_report_structure(const std::string& text) {
    std::size_t pos = 0;
    for (const char* header : report_section_headers()) {
        auto first = text.find(header);
        if (first == std::string::npos) return false;
        if (first < pos) return false;
        if (text.find(header, first + 1) != std::string::npos) return false;  // duplicated
        pos = first;
    }
    return true;
}

GeneratedReport generate_report(LlmClient& client, const ReportFeatures& rf,
                                const LlmParams& params) {
    const std::string prompt = build_prompt(rf);
    GeneratedReport report;
    report.model_id = client.model_id();
    report.prompt_hash = sha256_hex(prompt);

    std::string text = client.send(prompt, params);
    if (!validate_report_structure(text)) {
        text = client.send(prompt + repair_instruction(), params);
        if (!validate_report_structure(text))
            throw DomainError("generated report failed structural validation after repair "
                              "retry; raw text follows:\n" + text);
    }
    report.text = text;
    report.timestamp = utc_timestamp();
    return report;
}

std::optional<std::array<int, 2>> parse_vote_array(const std::string& text) {
    for (std::size_t open = text.find('['); open != std::string::npos;
         open = text.find('[', open + 1)) {
        auto close = text.find(']', open);
        if (close == std::string::npos) break;
        std::string inner = text.substr(open + 1, close - open - 1);
        std::replace(inner.begin(), inner.end(), ',', ' ');
        std::istringstream is(inner);
        int a, b;
        if (is >> a >> b) {
            std::string rest;
            if (!(is >> rest) && (a == 0 || a == 1) && (b == 0 || b == 1))
                return std::array<int, 2>{a, b};
        }
    }
    return std::nullopt;
}

VerificationResult verify_report(const GeneratedReport& report,
                                 const std::vector<LlmClient*>& verifiers,
                                 const LlmParams& params, LlmThrottle* throttle) {
    if (verifiers.size() != 3)
        throw DomainError("verify_report: exactly 3 verifier clients are required");
    const std::string prompt =
        replace_placeholder(verify_prompt_template(), "{{REPORT_TEXT}}", report.text);

    auto ask = [&](LlmClient* client) {
        VerifierVote vote;
        vote.model_id = client->model_id();
        auto guarded_send = [&](const std::string& p) {
            if (throttle) throttle->acquire();
            struct Release {
                LlmThrottle* t;
                ~Release() {
                    if (t) t->release();
                }
            } release{throttle};
            return client->send(p, params);
        };
        vote.raw_response = guarded_send(prompt);
        vote.vote = parse_vote_array(vote.raw_response);
        if (!vote.vote) {
            vote.raw_response = guarded_send(prompt + verify_reask_instruction());
            vote.vote = parse_vote_array(vote.raw_response);
        }
        return vote;
    };

    // The three verifiers run concurrently; the throttle bounds in-flight calls.
    std::vector<std::future<VerifierVote>> futures;
    for (auto* v : verifiers) futures.push_back(std::async(std::launch::async, ask, v));

    VerificationResult res;
    for (auto& f : futures) res.votes.push_back(f.get());

    for (int ind = 0; ind < 2; ++ind) {
        int ones = 0, total = 0;
        for (const auto& v : res.votes) {
            if (!v.vote) continue;
            ++total;
            ones += (*v.vote)[static_cast<std::size_t>(ind)];
        }
        if (total == 0 || ones * 2 == total) {
            res.unresolved[static_cast<std::size_t>(ind)] = true;
            res.majority[static_cast<std::size_t>(ind)] = 0;
        } else {
            res.majority[static_cast<std::size_t>(ind)] = ones * 2 > total ? 1 : 0;
        }
    }
    return res;
}

std::string verification_to_json(const VerificationResult& vr, const GeneratedReport& report) {
    ordered_json j;
    j["model_id"] = report.model_id;
    j["timestamp"] = report.timestamp;
    j["prompt_hash"] = report.prompt_hash;
    ordered_json votes = ordered_json::array();
    for (const auto& v : vr.votes) {
        ordered_json item;
        item["model_id"] = v.model_id;
        if (v.vote)
            item["vote"] = *v.vote;
        else
            item["vote"] = nullptr;
        item["raw_response"] = v.raw_response;
        votes.push_back(item);
    }
    j["votes"] = votes;
    j["majority"] = vr.majority;
    j["unresolved"] = vr.unresolved;
    return j.dump(2) + "\n";
}

}  // namespace eegbg
