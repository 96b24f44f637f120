#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "eegbg/abnormality.hpp"
#include "eegbg/features.hpp"
#include "eegbg/llm_client.hpp"

namespace eegbg {

// The structured findings object embedded in the generation prompt. The key
// set is fixed; serialization preserves this exact key order.
struct ReportFeatures {
    std::string eeg_quality;                     // EEG_quality
    std::vector<std::string> bad_channels;       // bad_channels
    std::string background_frequency;            // backgroundFrequency
    std::string bg_active;                       // bg_active
    std::string bg_amp;                          // bg_amp
    std::string bg_amp_sym;                      // bg_amp_sym
    std::string bg_freq;                         // bg_freq
    std::vector<std::string> abnormal_findings;  // abnormalFindings

    std::string to_json() const;  // stable 2-space indented serialization
    static ReportFeatures from_json(const std::string& text);
};

// Deterministic findings -> JSON-features mapping. EEG_quality is Good /
// Fair / Poor at >= 50% / >= 20% / < 20% of epochs surviving selection (and
// Poor whenever fewer than 10 epochs survive).
ReportFeatures build_feature_json(const AbnormalityFindings& findings,
                                  const BackgroundFeatures& features,
                                  const MontageMap& montage);

// Generation prompt: the five-component template with the serialized feature
// JSON embedded verbatim. Identical inputs produce identical bytes.
std::string build_prompt(const ReportFeatures& rf);

inline const std::array<const char*, 4>& report_section_headers() {
    static const std::array<const char*, 4> headers = {
        "=== EEG Findings ===", "=== Conclusion ===", "=== Clinical Correlation ===",
        "=== Advanced Strategies ==="};
    return headers;
}

// True when all four section headers occur exactly once and in order.
bool validate_report_structure(const std::string& text);

struct GeneratedReport {
    std::string text;
    std::string model_id;
    std::string timestamp;    // RFC 3339, honors SOURCE_DATE_EPOCH
    std::string prompt_hash;  // sha256 of the exact prompt bytes
};

// Sends the prompt, validates the four-section structure, retries once with a
// repair instruction on structural failure, then throws DomainError carrying
// the raw text. Transport errors from the client propagate.
GeneratedReport generate_report(LlmClient& client, const ReportFeatures& rf,
                                const LlmParams& params = {});

struct VerifierVote {
    std::string model_id;
    std::optional<std::array<int, 2>> vote;  // [gbs, focal]; nullopt = abstained
    std::string raw_response;
};

struct VerificationResult {
    std::vector<VerifierVote> votes;
    std::array<int, 2> majority{0, 0};
    std::array<bool, 2> unresolved{false, false};  // tie among non-abstainers
};

// Few-shot verification by three independent clients; each must return a
// parseable two-element 0/1 array (one re-ask per verifier, then abstention).
// Majority is taken per indicator over the non-abstaining verifiers; a tie is
// flagged unresolved. Throws DomainError unless exactly 3 clients are given.
VerificationResult verify_report(const GeneratedReport& report,
                                 const std::vector<LlmClient*>& verifiers,
                                 const LlmParams& params = {}, LlmThrottle* throttle = nullptr);

// Parses the first two-element 0/1 array in free-form text.
std::optional<std::array<int, 2>> parse_vote_array(const std::string& text);

std::string verification_to_json(const VerificationResult& vr, const GeneratedReport& report);

}  // namespace eegbg
