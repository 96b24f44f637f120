#include "eegbg/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "eegbg/errors.hpp"

namespace eegbg {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// ${VAR} -> environment value; unset variables expand to the empty string.
std::string interpolate_env(const std::string& value) {
    std::string out;
    std::size_t i = 0;
    while (i < value.size()) {
        if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
            auto close = value.find('}', i + 2);
            if (close == std::string::npos)
                throw ConfigError("unterminated ${...} in config value: " + value);
            std::string name = value.substr(i + 2, close - i - 2);
            const char* env = std::getenv(name.c_str());
            if (env) out += env;
            i = close + 1;
        } else {
            out += value[i++];
        }
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> out;
    std::istringstream is(value);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_num(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a number: \"" + value + "\"");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key " + key + ": not a boolean: \"" + value + "\"");
}

double positive(const std::string& key, double v) {
    if (v <= 0) throw ConfigError("config key " + key + " must be positive");
    return v;
}

}  // namespace

void PipelineConfig::apply_line(const std::string& key, const std::string& raw_value) {
    const std::string value = interpolate_env(raw_value);

    if (key == "rereference") {
        if (value == "average") {
            reference = ReferenceScheme::Average;
        } else if (value == "none") {
            reference = ReferenceScheme::None;
        } else if (value.rfind("rest:", 0) == 0) {
            reference = ReferenceScheme::Rest;
            rest_matrix_path = trim(value.substr(5));
            if (rest_matrix_path.empty())
                throw ConfigError("rereference = rest:<path> requires a matrix path");
        } else {
            throw ConfigError("rereference must be average, none, or rest:<path>");
        }
    } else if (key == "epoch.length_s") {
        epoch_len_s = positive(key, parse_num(key, value));
    } else if (key == "crop.seconds") {
        crop_seconds = parse_num(key, value);
    } else if (key == "select.amplitude_uv") {
        selection.amplitude_limit_uv = positive(key, parse_num(key, value));
    } else if (key == "select.ratio_sd") {
        selection.ratio_sd_factor = positive(key, parse_num(key, value));
    } else if (key == "select.eye_patterns") {
        selection.eye_event_patterns = split_csv(value);
    } else if (key == "artifact.candidate_pct") {
        artifact.candidate_percentile = positive(key, parse_num(key, value));
    } else if (key == "artifact.neighbor_pct") {
        artifact.neighbor_percentile = positive(key, parse_num(key, value));
    } else if (key == "artifact.bad_channel_frac") {
        artifact.bad_channel_fraction = positive(key, parse_num(key, value));
    } else if (key == "artifact.min_epochs") {
        artifact.min_epochs = static_cast<std::size_t>(positive(key, parse_num(key, value)));
    } else if (key == "artifact.repair") {
        repair = parse_bool(key, value);
    } else if (key == "multitaper.nw") {
        multitaper.time_bandwidth = positive(key, parse_num(key, value));
        artifact.multitaper.time_bandwidth = multitaper.time_bandwidth;
    } else if (key == "multitaper.tapers") {
        multitaper.n_tapers = static_cast<int>(positive(key, parse_num(key, value)));
        artifact.multitaper.n_tapers = multitaper.n_tapers;
    } else if (key == "thresholds.pdr_hz") {
        thresholds.pdr_hz = positive(key, parse_num(key, value));
    } else if (key == "thresholds.pdr_gbs_hz") {
        thresholds.pdr_gbs_hz = positive(key, parse_num(key, value));
    } else if (key == "thresholds.slow_ratio_pct") {
        thresholds.slow_ratio_pct = positive(key, parse_num(key, value));
    } else if (key == "thresholds.lr_ratio") {
        thresholds.lr_ratio = positive(key, parse_num(key, value));
    } else if (key == "thresholds.pdr_diff_hz") {
        thresholds.pdr_diff_hz = positive(key, parse_num(key, value));
    } else if (key == "thresholds.focal_score") {
        thresholds.focal_score = positive(key, parse_num(key, value));
    } else if (key == "thresholds.alpha_score") {
        thresholds.alpha_score = positive(key, parse_num(key, value));
    } else if (key == "pdr.models") {
        pdr_model_paths = split_csv(value);
    } else if (key == "llm.generator") {
        generator_provider = value;
    } else if (key == "llm.verifiers") {
        verifier_providers = split_csv(value);
    } else if (key == "llm.max_inflight") {
        llm_max_inflight = static_cast<int>(positive(key, parse_num(key, value)));
    } else if (key == "output.dir") {
        output_dir = value;
    } else if (key == "output.psd_csv") {
        export_psd_csv = parse_bool(key, value);
    } else if (key == "output.mask_csv") {
        export_mask_csv = parse_bool(key, value);
    } else if (key.rfind("llm.provider.", 0) == 0) {
        std::string rest = key.substr(13);
        auto dot = rest.find('.');
        if (dot == std::string::npos)
            throw ConfigError("provider keys look like llm.provider.<name>.<field>: " + key);
        std::string name = rest.substr(0, dot), field = rest.substr(dot + 1);
        auto& p = providers[name];
        p.name = name;
        if (field == "url") p.base_url = value;
        else if (field == "path") p.path = value;
        else if (field == "model") p.model = value;
        else if (field == "key_env") p.api_key_env = value;
        else if (field == "max_attempts") p.max_attempts = static_cast<int>(parse_num(key, value));
        else if (field == "backoff_s") p.backoff_initial_s = parse_num(key, value);
        else if (field == "timeout_s") p.timeout_s = static_cast<int>(parse_num(key, value));
        else throw ConfigError("unknown provider field in config key: " + key);
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

PipelineConfig PipelineConfig::from_file(const std::string& path, bool allow_missing) {
    PipelineConfig cfg;
    std::ifstream in(path);
    if (!in) {
        if (allow_missing) return cfg;
        throw ConfigError("cannot open config file: " + path);
    }
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config " + path + " line " + std::to_string(lineno) +
                              ": expected key = value");
        try {
            cfg.apply_line(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("config " + path + " line " + std::to_string(lineno) + ": " +
                              e.what());
        }
    }
    return cfg;
}

std::string PipelineConfig::echo() const {
    std::ostringstream os;
    os << "rereference = "
       << (reference == ReferenceScheme::Average
               ? "average"
               : reference == ReferenceScheme::None ? "none" : "rest:" + rest_matrix_path)
       << '\n';
    os << "epoch.length_s = " << epoch_len_s << '\n';
    os << "crop.seconds = " << crop_seconds << '\n';
    os << "select.amplitude_uv = " << selection.amplitude_limit_uv << '\n';
    os << "select.ratio_sd = " << selection.ratio_sd_factor << '\n';
    os << "select.eye_patterns = ";
    for (std::size_t i = 0; i < selection.eye_event_patterns.size(); ++i)
        os << (i ? "," : "") << selection.eye_event_patterns[i];
    os << '\n';
    os << "artifact.candidate_pct = " << artifact.candidate_percentile << '\n';
    os << "artifact.neighbor_pct = " << artifact.neighbor_percentile << '\n';
    os << "artifact.bad_channel_frac = " << artifact.bad_channel_fraction << '\n';
    os << "artifact.min_epochs = " << artifact.min_epochs << '\n';
    os << "artifact.repair = " << (repair ? "true" : "false") << '\n';
    os << "multitaper.nw = " << multitaper.time_bandwidth << '\n';
    os << "multitaper.tapers = " << multitaper.n_tapers << '\n';
    os << "thresholds.pdr_hz = " << thresholds.pdr_hz << '\n';
    os << "thresholds.pdr_gbs_hz = " << thresholds.pdr_gbs_hz << '\n';
    os << "thresholds.slow_ratio_pct = " << thresholds.slow_ratio_pct << '\n';
    os << "thresholds.lr_ratio = " << thresholds.lr_ratio << '\n';
    os << "thresholds.pdr_diff_hz = " << thresholds.pdr_diff_hz << '\n';
    os << "thresholds.focal_score = " << thresholds.focal_score << '\n';
    os << "thresholds.alpha_score = " << thresholds.alpha_score << '\n';
    os << "pdr.models = ";
    for (std::size_t i = 0; i < pdr_model_paths.size(); ++i)
        os << (i ? "," : "") << pdr_model_paths[i];
    os << '\n';
    os << "llm.generator = " << generator_provider << '\n';
    os << "llm.verifiers = ";
    for (std::size_t i = 0; i < verifier_providers.size(); ++i)
        os << (i ? "," : "") << verifier_providers[i];
    os << '\n';
    os << "llm.max_inflight = " << llm_max_inflight << '\n';
    os << "output.dir = " << output_dir << '\n';
    for (const auto& [name, p] : providers) {
        os << "llm.provider." << name << ".url = " << p.base_url << '\n';
        os << "llm.provider." << name << ".path = " << p.path << '\n';
        os << "llm.provider." << name << ".model = " << p.model << '\n';
        os << "llm.provider." << name << ".key_env = " << p.api_key_env << '\n';
    }
    return os.str();
}

}  // namespace eegbg
