#pragma once

#include <string>

namespace eegbg {

// Versioned prompt resources. Bump the version and extend the changelog in
// prompt_templates.cpp whenever the wording changes; prompt hashes land in
// run provenance, so silent edits would break reproducibility.
extern const char* const kGeneratePromptVersion;
extern const char* const kVerifyPromptVersion;

// Report-generation prompt with five fixed components (role definition, data
// provision, task specification, report structure, guidance). The serialized
// feature JSON replaces {{FEATURES_JSON}} verbatim.
const std::string& generate_prompt_template();

// Few-shot verification prompt: classifies a report for the two indicators
// (generalized background slowing, focal abnormality) and demands a
// two-element 0/1 array. The report text replaces {{REPORT_TEXT}}.
const std::string& verify_prompt_template();

// Appended when a generated report misses required sections and we retry.
const std::string& repair_instruction();

// Appended when a verifier's answer could not be parsed and we re-ask.
const std::string& verify_reask_instruction();

}  // namespace eegbg
