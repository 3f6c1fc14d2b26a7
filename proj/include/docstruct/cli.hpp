#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "docstruct/config.hpp"
#include "docstruct/error.hpp"
#include "docstruct/ingest.hpp"

namespace docstruct::cli {

namespace fs = std::filesystem;

/// Values given on the command line; unset fields leave the config alone.
struct Overrides {
    std::optional<std::string> profile;
    std::optional<std::size_t> stride;
    std::optional<std::size_t> threshold;
    std::optional<bool> chunking;
    std::optional<std::string> predictor;
    std::optional<std::string> backend_url;
    std::optional<std::size_t> node_chunk_chars;
    std::optional<std::string> summarizer;
    std::optional<std::string> format;
    std::optional<std::size_t> jobs;
    std::optional<bool> merge_log;
    std::optional<bool> chunk_plan;
};

/// default < config file < environment < command line.
PipelineConfig resolve_config(const std::optional<fs::path>& config_file, const Overrides& o,
                              const EnvLookup& env = process_env);

fs::path default_profiles_dir();

struct LoadedDocument {
    CanonicalDocument doc;
    std::optional<NormalizationReport> normalization; // set for raw OCR input
};

/// Reads canonical JSON as is; anything else is normalized with the profile.
LoadedDocument load_document(const fs::path& input, const std::string& profile, const fs::path& profiles_dir);

/// {"error": {"code": ..., "message": ...}} on one line.
void emit_error(std::ostream& err, const std::string& code, const std::string& message);

struct NormalizeArgs {
    fs::path input;
    std::string profile = "mineru";
    fs::path profiles_dir = default_profiles_dir();
    std::optional<fs::path> output;
    std::optional<fs::path> report;
};
int cmd_normalize(const NormalizeArgs& a, std::ostream& out, std::ostream& err);

struct ProcessArgs {
    std::vector<fs::path> inputs;
    std::optional<fs::path> config;
    fs::path out_dir = "out";
    fs::path profiles_dir = default_profiles_dir();
    Overrides overrides;
};
/// Writes <out_dir>/<doc_id>/{tree.json, tree.md, predictions.json,
/// report.json, merge_log.json, chunks.json} per input.
int cmd_process(const ProcessArgs& a, std::ostream& out, std::ostream& err, const EnvLookup& env = process_env);

struct EvalArgs {
    std::vector<fs::path> predictions;
    std::vector<fs::path> gold;
    std::optional<fs::path> json_out;
};
/// Files are paired by doc_id.
int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err);

struct ExportArgs {
    fs::path tree;
    std::string format = "markdown";
    std::optional<fs::path> output;
};
int cmd_export(const ExportArgs& a, std::ostream& out, std::ostream& err);

struct InspectArgs {
    fs::path input;
    std::string profile = "mineru";
    fs::path profiles_dir = default_profiles_dir();
    std::size_t stride = 8;
    std::size_t threshold = 2;
    std::string task = "title_hierarchy";
};
int cmd_inspect_chunks(const InspectArgs& a, std::ostream& out, std::ostream& err);

Json read_json_file(const fs::path& p, const char* error_code);
void write_file(const fs::path& p, const std::string& content);

} // namespace docstruct::cli
