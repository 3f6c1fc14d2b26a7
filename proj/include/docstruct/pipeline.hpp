#pragma once

#include <memory>
#include <string>
#include <vector>

#include "docstruct/apply.hpp"
#include "docstruct/chunking.hpp"
#include "docstruct/config.hpp"
#include "docstruct/eval.hpp"
#include "docstruct/predictors.hpp"
#include "docstruct/tree.hpp"

namespace docstruct {

struct ChunkTrace {
    std::string task;
    ChunkPlan plan;
};

struct PipelineResult {
    ResolvedDocument resolved;
    DocTree tree;
    /// Same layout as a gold annotation file.
    GoldAnnotations predictions;
    std::vector<ChunkTrace> chunk_plans;
    std::vector<SyncStep> sync_steps;
    Issues issues;
};

std::unique_ptr<Predictor> make_predictor(const PipelineConfig& cfg);
/// nullptr when summaries are disabled.
std::unique_ptr<Summarizer> make_summarizer(const PipelineConfig& cfg);

/// Filtering, chunked prediction, synchronization, apply, tree building,
/// node chunking and summaries for one document.
PipelineResult run_pipeline(const CanonicalDocument& doc, const PipelineConfig& cfg, Predictor& predictor,
                            Summarizer* summarizer);

struct Artifacts {
    std::string tree_json;
    std::string markdown;
    std::string merge_log;
    std::string chunk_plan;
    std::string predictions;
    std::string report;
};

/// Serialized outputs; formats not selected by cfg stay empty.
Artifacts render_artifacts(const PipelineResult& r, const PipelineConfig& cfg, std::size_t input_elements);

Json run_report(const PipelineResult& r, std::size_t input_elements);

/// Pretty JSON with a trailing newline, as written to disk.
std::string dump_file(const Json& j);

} // namespace docstruct
