#include <CLI11.hpp>

#include <iostream>

#include "docstruct/cli.hpp"

namespace cli = docstruct::cli;

int main(int argc, char** argv) {
    CLI::App app{"docstruct: structure recovery for OCR layout output"};
    app.require_subcommand(1);

    cli::NormalizeArgs norm;
    auto* normalize = app.add_subcommand("normalize", "map raw OCR JSON to the canonical element schema");
    normalize->add_option("input", norm.input, "raw OCR JSON")->required();
    normalize->add_option("--profile", norm.profile, "label profile name");
    normalize->add_option("--profiles-dir", norm.profiles_dir, "directory of profile JSON files");
    normalize->add_option("-o,--output", norm.output, "canonical JSON output (default stdout)");
    normalize->add_option("--report", norm.report, "normalization report output");

    cli::ProcessArgs proc;
    std::optional<std::string> profile, predictor, backend_url, format, summarizer;
    std::optional<std::size_t> stride, threshold, node_chars, jobs;
    bool no_chunking = false, merge_log = false, no_merge_log = false, chunk_plan = false;
    auto* process = app.add_subcommand("process", "run the full pipeline on one or more documents");
    process->add_option("inputs", proc.inputs, "canonical or raw OCR JSON files")->required();
    process->add_option("-c,--config", proc.config, "JSON config file");
    process->add_option("--out-dir", proc.out_dir, "output directory");
    process->add_option("--profiles-dir", proc.profiles_dir, "directory of profile JSON files");
    process->add_option("--profile", profile, "label profile name");
    process->add_option("--stride", stride, "chunk stride in pages");
    process->add_option("--threshold", threshold, "chunk boundary search radius in pages");
    process->add_flag("--no-chunking", no_chunking, "predict each subtask over the whole document");
    process->add_option("--predictor", predictor, "rules or remote")->check(CLI::IsMember({"rules", "remote"}));
    process->add_option("--backend-url", backend_url, "predictor backend URL");
    process->add_option("--node-chunk-chars", node_chars, "subnode split threshold in characters");
    process->add_option("--summarizer", summarizer, "extractive, remote or none")
        ->check(CLI::IsMember({"extractive", "remote", "none"}));
    process->add_option("--format", format, "json, markdown or both")
        ->check(CLI::IsMember({"json", "markdown", "both"}));
    process->add_option("--jobs", jobs, "worker threads");
    process->add_flag("--merge-log", merge_log, "write merge_log.json");
    process->add_flag("--no-merge-log", no_merge_log, "skip merge_log.json");
    process->add_flag("--chunk-plan", chunk_plan, "write chunks.json");

    cli::EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "score prediction files against gold annotations");
    eval->add_option("--pred", ev.predictions, "predictions.json files")->required();
    eval->add_option("--gold", ev.gold, "gold annotation files")->required();
    eval->add_option("--json", ev.json_out, "write the report as JSON");

    cli::ExportArgs ex;
    auto* exp = app.add_subcommand("export", "re-export a tree.json file");
    exp->add_option("tree", ex.tree, "tree.json")->required();
    exp->add_option("--format", ex.format, "json or markdown")->check(CLI::IsMember({"json", "markdown"}));
    exp->add_option("-o,--output", ex.output, "output file (default stdout)");

    cli::InspectArgs insp;
    auto* inspect = app.add_subcommand("inspect-chunks", "print the dynamic chunk plan of a document");
    inspect->add_option("input", insp.input, "canonical or raw OCR JSON")->required();
    inspect->add_option("--profile", insp.profile, "label profile name");
    inspect->add_option("--profiles-dir", insp.profiles_dir, "directory of profile JSON files");
    inspect->add_option("--stride", insp.stride, "chunk stride in pages");
    inspect->add_option("--threshold", insp.threshold, "boundary search radius in pages");
    inspect->add_option("--task", insp.task, "title_hierarchy, text_truncation or association");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        cli::emit_error(std::cerr, "cli.Usage", e.what());
        return 2;
    }

    if (*normalize) return cli::cmd_normalize(norm, std::cout, std::cerr);
    if (*process) {
        auto& o = proc.overrides;
        o.profile = profile;
        o.stride = stride;
        o.threshold = threshold;
        if (no_chunking) o.chunking = false;
        o.predictor = predictor;
        o.backend_url = backend_url;
        o.node_chunk_chars = node_chars;
        o.summarizer = summarizer;
        o.format = format;
        o.jobs = jobs;
        if (merge_log) o.merge_log = true;
        if (no_merge_log) o.merge_log = false;
        if (chunk_plan) o.chunk_plan = true;
        return cli::cmd_process(proc, std::cout, std::cerr);
    }
    if (*eval) return cli::cmd_eval(ev, std::cout, std::cerr);
    if (*exp) return cli::cmd_export(ex, std::cout, std::cerr);
    if (*inspect) return cli::cmd_inspect_chunks(insp, std::cout, std::cerr);
    return 2;
}
