#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "docstruct/filtering.hpp"
#include "docstruct/json_fwd.hpp"

namespace docstruct {

enum class PredictorMode { rules, remote };
enum class SummarizerMode { extractive, remote, none };
enum class ExportFormat { json, markdown, both };

std::string_view to_string(PredictorMode m);
std::string_view to_string(SummarizerMode m);
std::string_view to_string(ExportFormat f);
/// Throw cli.ConfigInvalid on unknown names.
PredictorMode predictor_mode_from_string(std::string_view s);
SummarizerMode summarizer_mode_from_string(std::string_view s);
ExportFormat export_format_from_string(std::string_view s);

inline constexpr const char* kEnvBackendUrl = "DOCSTRUCT_BACKEND_URL";
inline constexpr const char* kEnvBackendToken = "DOCSTRUCT_BACKEND_TOKEN";

struct PipelineConfig {
    std::string profile = "mineru";
    std::size_t stride = 8;
    std::size_t threshold = 2;
    bool chunking = true;
    FilterConfig filter;

    PredictorMode predictor = PredictorMode::rules;
    std::string backend_url;
    int backend_timeout_ms = 30000;
    int retries = 1;
    /// Only ever read from the environment.
    std::optional<std::string> backend_token;

    std::size_t node_chunk_chars = 1200;
    SummarizerMode summarizer = SummarizerMode::extractive;
    std::string summarizer_url; // empty: same as backend_url
    std::size_t summary_sentences = 2;
    std::size_t summary_chars = 400;
    std::size_t max_title_chars = 150;

    ExportFormat format = ExportFormat::both;
    bool merge_log = true;
    bool chunk_plan = false;
    std::size_t jobs = 1;
};

/// Overlays the keys present in j onto base. Unknown keys and wrong types
/// throw cli.ConfigInvalid.
PipelineConfig config_from_json(const Json& j, PipelineConfig base = {});

/// Throws cli.ConfigNotFound when the file is missing, cli.ConfigInvalid
/// when it is not a valid config.
PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base = {});

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
std::optional<std::string> process_env(const char* name);

/// Backend URL and token from the environment.
void apply_env(PipelineConfig& cfg, const EnvLookup& env = process_env);

/// Range checks; throws cli.ConfigInvalid.
void validate(const PipelineConfig& cfg);

/// The token is never serialized.
Json to_json(const PipelineConfig& cfg);

} // namespace docstruct
