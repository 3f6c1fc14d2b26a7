#include "docstruct/config.hpp"

#include <cstdlib>
#include <fstream>

#include "docstruct/error.hpp"

namespace docstruct {

namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error("cli.ConfigInvalid", why); }

template <class T>
T get_as(const Json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const Json::exception&) {
        invalid("config key '" + key + "' has the wrong type");
    }
}

std::size_t get_count(const Json& j, const std::string& key) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
        invalid("config key '" + key + "' must be a non-negative integer");
    }
    return j.get<std::size_t>();
}

int get_int(const Json& j, const std::string& key) {
    if (!j.is_number_integer()) invalid("config key '" + key + "' must be an integer");
    return j.get<int>();
}

} // namespace

std::string_view to_string(PredictorMode m) { return m == PredictorMode::rules ? "rules" : "remote"; }

std::string_view to_string(SummarizerMode m) {
    switch (m) {
    case SummarizerMode::extractive: return "extractive";
    case SummarizerMode::remote: return "remote";
    case SummarizerMode::none: return "none";
    }
    return "extractive";
}

std::string_view to_string(ExportFormat f) {
    switch (f) {
    case ExportFormat::json: return "json";
    case ExportFormat::markdown: return "markdown";
    case ExportFormat::both: return "both";
    }
    return "both";
}

PredictorMode predictor_mode_from_string(std::string_view s) {
    if (s == "rules") return PredictorMode::rules;
    if (s == "remote") return PredictorMode::remote;
    invalid("predictor must be 'rules' or 'remote', got '" + std::string(s) + "'");
}

SummarizerMode summarizer_mode_from_string(std::string_view s) {
    for (auto m : {SummarizerMode::extractive, SummarizerMode::remote, SummarizerMode::none}) {
        if (to_string(m) == s) return m;
    }
    invalid("summarizer must be 'extractive', 'remote' or 'none', got '" + std::string(s) + "'");
}

ExportFormat export_format_from_string(std::string_view s) {
    for (auto f : {ExportFormat::json, ExportFormat::markdown, ExportFormat::both}) {
        if (to_string(f) == s) return f;
    }
    invalid("format must be 'json', 'markdown' or 'both', got '" + std::string(s) + "'");
}

PipelineConfig config_from_json(const Json& j, PipelineConfig cfg) {
    if (!j.is_object()) invalid("config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "profile") {
            cfg.profile = get_as<std::string>(v, key);
        } else if (key == "stride") {
            cfg.stride = get_count(v, key);
        } else if (key == "threshold") {
            cfg.threshold = get_count(v, key);
        } else if (key == "chunking") {
            cfg.chunking = get_as<bool>(v, key);
        } else if (key == "filter") {
            cfg.filter = filter_config_from_json(v);
        } else if (key == "predictor") {
            cfg.predictor = predictor_mode_from_string(get_as<std::string>(v, key));
        } else if (key == "backend_url") {
            cfg.backend_url = get_as<std::string>(v, key);
        } else if (key == "backend_timeout_ms") {
            cfg.backend_timeout_ms = get_int(v, key);
        } else if (key == "retries") {
            cfg.retries = get_int(v, key);
        } else if (key == "node_chunk_chars") {
            cfg.node_chunk_chars = get_count(v, key);
        } else if (key == "summarizer") {
            cfg.summarizer = summarizer_mode_from_string(get_as<std::string>(v, key));
        } else if (key == "summarizer_url") {
            cfg.summarizer_url = get_as<std::string>(v, key);
        } else if (key == "summary_sentences") {
            cfg.summary_sentences = get_count(v, key);
        } else if (key == "summary_chars") {
            cfg.summary_chars = get_count(v, key);
        } else if (key == "max_title_chars") {
            cfg.max_title_chars = get_count(v, key);
        } else if (key == "format") {
            cfg.format = export_format_from_string(get_as<std::string>(v, key));
        } else if (key == "merge_log") {
            cfg.merge_log = get_as<bool>(v, key);
        } else if (key == "chunk_plan") {
            cfg.chunk_plan = get_as<bool>(v, key);
        } else if (key == "jobs") {
            cfg.jobs = get_count(v, key);
        } else {
            invalid("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw Error("cli.ConfigNotFound", "cannot open config file " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        invalid(path.string() + ": " + e.what());
    }
    return config_from_json(j, std::move(base));
}

std::optional<std::string> process_env(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

void apply_env(PipelineConfig& cfg, const EnvLookup& env) {
    if (auto url = env(kEnvBackendUrl)) cfg.backend_url = *url;
    if (auto token = env(kEnvBackendToken)) cfg.backend_token = *token;
}

void validate(const PipelineConfig& cfg) {
    if (cfg.stride < 1 || cfg.stride > 1000) invalid("stride must be in [1, 1000]");
    if (cfg.threshold >= cfg.stride) invalid("threshold must be smaller than stride");
    if (cfg.node_chunk_chars < 1 || cfg.node_chunk_chars > 10'000'000) {
        invalid("node_chunk_chars must be in [1, 10000000]");
    }
    if (cfg.jobs < 1 || cfg.jobs > 256) invalid("jobs must be in [1, 256]");
    if (cfg.retries < 0 || cfg.retries > 5) invalid("retries must be in [0, 5]");
    if (cfg.backend_timeout_ms < 1) invalid("backend_timeout_ms must be positive");
    if (cfg.summary_sentences < 1) invalid("summary_sentences must be >= 1");
    if (cfg.summary_chars < 1) invalid("summary_chars must be >= 1");
    if (cfg.max_title_chars < 1) invalid("max_title_chars must be >= 1");
    if (cfg.predictor == PredictorMode::remote && cfg.backend_url.empty()) {
        invalid("remote predictor needs backend_url (or " + std::string(kEnvBackendUrl) + ")");
    }
    if (cfg.summarizer == SummarizerMode::remote && cfg.summarizer_url.empty() && cfg.backend_url.empty()) {
        invalid("remote summarizer needs summarizer_url or backend_url");
    }
}

Json to_json(const PipelineConfig& cfg) {
    Json j;
    j["profile"] = cfg.profile;
    j["stride"] = cfg.stride;
    j["threshold"] = cfg.threshold;
    j["chunking"] = cfg.chunking;
    j["filter"] = to_json(cfg.filter);
    j["predictor"] = std::string(to_string(cfg.predictor));
    j["backend_url"] = cfg.backend_url;
    j["backend_timeout_ms"] = cfg.backend_timeout_ms;
    j["retries"] = cfg.retries;
    j["node_chunk_chars"] = cfg.node_chunk_chars;
    j["summarizer"] = std::string(to_string(cfg.summarizer));
    j["summarizer_url"] = cfg.summarizer_url;
    j["summary_sentences"] = cfg.summary_sentences;
    j["summary_chars"] = cfg.summary_chars;
    j["max_title_chars"] = cfg.max_title_chars;
    j["format"] = std::string(to_string(cfg.format));
    j["merge_log"] = cfg.merge_log;
    j["chunk_plan"] = cfg.chunk_plan;
    j["jobs"] = cfg.jobs;
    return j;
}

} // namespace docstruct
