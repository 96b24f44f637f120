// Prompt resources.
//
// Changelog:
//   gen-v1    initial generation prompt: role / data / task / structure /
//             guidance components, two worked guidance examples.
//   verify-v1 initial verification prompt: two indicators, four worked
//             examples (two per class for each indicator), array-only answer.

#include "eegbg/prompt_templates.hpp"

namespace eegbg {

const char* const kGeneratePromptVersion = "gen-v1";
const char* const kVerifyPromptVersion = "verify-v1";

const std::string& generate_prompt_template() {
    static const std::string text = R"PROMPT([Role Definition]
You are a board-certified neurologist with access to comprehensive neurological databases. You are writing the formal interpretation of a routine scalp EEG recording.

[Data Provision]
The structured features below were extracted from the recording's background activity:

{{FEATURES_JSON}}

Field guide: EEG_quality is the technical quality of the analyzed segments. bad_channels lists electrodes excluded as artifact channels. backgroundFrequency gives the posterior dominant rhythm for each hemisphere. bg_active states whether the background frequency is normal or shows generalized slowing. bg_amp is the background amplitude bucket. bg_amp_sym and bg_freq describe amplitude and frequency symmetry between hemispheres. abnormalFindings lists every detected abnormality and is empty for a normal background.

[Task Specification]
Write a detailed, structured EEG background report based strictly on the features above. Describe only findings supported by the data; do not invent results. Keep the language clinical and concise.

[Report Structure]
The report must contain exactly these four sections, in this order, each introduced by its header on its own line:
=== EEG Findings ===
=== Conclusion ===
=== Clinical Correlation ===
=== Advanced Strategies ===

[Guidance]
- With an empty abnormalFindings list, state that the EEG background is within normal limits, that clinical correlation is recommended, and that no further workup is required from the EEG alone.
- With abnormal findings, name each abnormality, localize it using the channels given, and recommend appropriate correlation and imaging.
- Example conclusion for a normal study: "Normal awake EEG background. No generalized slowing, asymmetry, or focal slow waves."
- Example conclusion for an abnormal study: "Abnormal EEG findings are observed, characterized by focal slow wave or asymmetric abnormality in the right frontotemporal region."
)PROMPT";
    return text;
}

const std::string& verify_prompt_template() {
    static const std::string text = R"PROMPT(You verify the content of EEG reports. Classify the report below for the presence of two indicators and answer with a two-element array [GBS, FOCAL], where each element is 1 when the indicator is present and 0 when absent:
- GBS: generalized background slowing (diffusely slowed posterior dominant rhythm).
- FOCAL: focal abnormality (focal slow waves, background asymmetry, or a regional amplitude reduction).

Answer with the array only, nothing else.

Example 1
Report: "The EEG background is within normal limits. The posterior dominant rhythm is 9.8 Hz bilaterally, symmetric in frequency and amplitude."
Answer: [0, 0]

Example 2
Report: "The posterior dominant rhythm is 6.5 Hz over both hemispheres, consistent with generalized background slowing. No focal features."
Answer: [1, 0]

Example 3
Report: "Background frequency is normal at 9.5 Hz. Continuous left temporal theta slowing is present, consistent with a focal abnormality in the left temporal region."
Answer: [0, 1]

Example 4
Report: "Diffuse slowing of the background to 7 Hz with superimposed right frontotemporal delta activity, indicating generalized slowing with a focal abnormality."
Answer: [1, 1]

Report:
{{REPORT_TEXT}}

Answer:
)PROMPT";
    return text;
}

const std::string& repair_instruction() {
    static const std::string text =
        "\n\nThe previous answer did not follow the required structure. Produce the report "
        "again with exactly these four headers, each on its own line and in this order: "
        "=== EEG Findings ===, === Conclusion ===, === Clinical Correlation ===, "
        "=== Advanced Strategies ===.";
    return text;
}

const std::string& verify_reask_instruction() {
    static const std::string text =
        "\n\nYour previous answer could not be parsed. Reply with exactly one two-element "
        "array of 0/1 values, for example [0, 1], and nothing else.";
    return text;
}

}  // namespace eegbg
