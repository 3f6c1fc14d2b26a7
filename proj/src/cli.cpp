#include "docstruct/cli.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "docstruct/chunking.hpp"
#include "docstruct/eval.hpp"
#include "docstruct/parallel.hpp"
#include "docstruct/pipeline.hpp"
#include "docstruct/tree.hpp"

#ifndef DOCSTRUCT_PROFILE_DIR
#define DOCSTRUCT_PROFILE_DIR "profiles"
#endif

namespace docstruct::cli {

PipelineConfig resolve_config(const std::optional<fs::path>& config_file, const Overrides& o, const EnvLookup& env) {
    PipelineConfig cfg;
    if (config_file) cfg = load_config_file(*config_file, cfg);
    apply_env(cfg, env);
    if (o.profile) cfg.profile = *o.profile;
    if (o.stride) cfg.stride = *o.stride;
    if (o.threshold) cfg.threshold = *o.threshold;
    if (o.chunking) cfg.chunking = *o.chunking;
    if (o.predictor) cfg.predictor = predictor_mode_from_string(*o.predictor);
    if (o.backend_url) cfg.backend_url = *o.backend_url;
    if (o.node_chunk_chars) cfg.node_chunk_chars = *o.node_chunk_chars;
    if (o.summarizer) cfg.summarizer = summarizer_mode_from_string(*o.summarizer);
    if (o.format) cfg.format = export_format_from_string(*o.format);
    if (o.jobs) cfg.jobs = *o.jobs;
    if (o.merge_log) cfg.merge_log = *o.merge_log;
    if (o.chunk_plan) cfg.chunk_plan = *o.chunk_plan;
    validate(cfg);
    return cfg;
}

fs::path default_profiles_dir() { return DOCSTRUCT_PROFILE_DIR; }

Json read_json_file(const fs::path& p, const char* error_code) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cli.InputNotFound", "cannot open " + p.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(error_code, p.string() + ": " + e.what());
    }
}

void write_file(const fs::path& p, const std::string& content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cli.OutputFailed", "cannot write " + p.string());
    out << content;
}

LoadedDocument load_document(const fs::path& input, const std::string& profile, const fs::path& profiles_dir) {
    const Json j = read_json_file(input, "ingest.MalformedInput");
    LoadedDocument out;
    if (is_canonical_json(j)) {
        out.doc = document_from_json(j);
        return out;
    }
    const auto registry = ProfileRegistry::from_directory(profiles_dir);
    auto res = normalize_elements(j, registry.get(profile), input.stem().string());
    out.doc = std::move(res.doc);
    out.normalization = std::move(res.report);
    return out;
}

void emit_error(std::ostream& err, const std::string& code, const std::string& message) {
    Json j;
    j["error"] = Json{{"code", code}, {"message", message}};
    err << j.dump() << "\n";
}

namespace {

std::string safe_name(const std::string& id) {
    std::string s;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        s += ok ? c : '_';
    }
    if (s.empty() || s == "." || s == "..") s = "document";
    return s;
}

} // namespace

int cmd_normalize(const NormalizeArgs& a, std::ostream& out, std::ostream& err) {
    try {
        auto loaded = load_document(a.input, a.profile, a.profiles_dir);
        const auto text = dump_file(to_json(loaded.doc));
        if (a.output) {
            write_file(*a.output, text);
        } else {
            out << text;
        }
        if (a.report && loaded.normalization) write_file(*a.report, dump_file(to_json(*loaded.normalization)));
        return 0;
    } catch (const Error& e) {
        emit_error(err, e.code(), e.what());
        return 1;
    }
}

int cmd_process(const ProcessArgs& a, std::ostream& out, std::ostream& err, const EnvLookup& env) {
    PipelineConfig cfg;
    std::unique_ptr<Predictor> predictor;
    std::unique_ptr<Summarizer> summarizer;
    try {
        cfg = resolve_config(a.config, a.overrides, env);
        predictor = make_predictor(cfg);
        summarizer = make_summarizer(cfg);
    } catch (const Error& e) {
        emit_error(err, e.code(), e.what());
        return 2;
    }
    if (a.inputs.empty()) {
        emit_error(err, "cli.NoInput", "no input documents given");
        return 2;
    }

    PipelineConfig doc_cfg = cfg;
    if (a.inputs.size() > 1) doc_cfg.jobs = 1;
    struct Outcome {
        std::optional<Error> error;
        std::string line;
    };
    std::vector<Outcome> outcomes(a.inputs.size());
    parallel_for(a.inputs.size(), a.inputs.size() > 1 ? cfg.jobs : 1, [&](std::size_t i) {
        try {
            auto loaded = load_document(a.inputs[i], cfg.profile, a.profiles_dir);
            const auto result = run_pipeline(loaded.doc, doc_cfg, *predictor, summarizer.get());
            const auto art = render_artifacts(result, doc_cfg, loaded.doc.elements.size());
            const auto dir = a.out_dir / safe_name(loaded.doc.doc_id);
            fs::create_directories(dir);
            if (!art.tree_json.empty()) write_file(dir / "tree.json", art.tree_json);
            if (!art.markdown.empty()) write_file(dir / "tree.md", art.markdown);
            if (!art.merge_log.empty()) write_file(dir / "merge_log.json", art.merge_log);
            if (!art.chunk_plan.empty()) write_file(dir / "chunks.json", art.chunk_plan);
            write_file(dir / "predictions.json", art.predictions);
            write_file(dir / "report.json", art.report);
            outcomes[i].line = loaded.doc.doc_id + ": " + std::to_string(result.issues.size()) + " warnings -> " +
                               dir.string();
        } catch (const Error& e) {
            outcomes[i].error = e;
        } catch (const std::exception& e) {
            outcomes[i].error = Error("cli.Internal", e.what());
        }
    });
    int status = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].error) {
            emit_error(err, outcomes[i].error->code(), a.inputs[i].string() + ": " + outcomes[i].error->what());
            status = 1;
        } else {
            out << outcomes[i].line << "\n";
        }
    }
    return status;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    try {
        std::map<std::string, GoldAnnotations> preds;
        for (const auto& p : a.predictions) {
            auto g = annotations_from_json(read_json_file(p, "eval.SchemaMismatch"));
            preds[g.doc_id] = std::move(g);
        }
        std::vector<std::pair<GoldAnnotations, GoldAnnotations>> pairs;
        for (const auto& p : a.gold) {
            auto gold = annotations_from_json(read_json_file(p, "eval.SchemaMismatch"));
            const auto it = preds.find(gold.doc_id);
            if (it == preds.end()) {
                throw Error("eval.MissingPrediction", "no prediction file for doc_id '" + gold.doc_id + "'");
            }
            pairs.emplace_back(it->second, std::move(gold));
        }
        const auto report = evaluate(pairs);
        out << to_table(report);
        if (a.json_out) write_file(*a.json_out, dump_file(to_json(report)));
        return 0;
    } catch (const Error& e) {
        emit_error(err, e.code(), e.what());
        return 1;
    }
}

int cmd_export(const ExportArgs& a, std::ostream& out, std::ostream& err) {
    try {
        const auto tree = tree_from_json(read_json_file(a.tree, "tree.MalformedTree"));
        std::string text;
        if (a.format == "markdown") {
            text = export_markdown(tree);
        } else if (a.format == "json") {
            text = dump_file(tree_to_json(tree));
        } else {
            throw Error("cli.ConfigInvalid", "export format must be 'json' or 'markdown'");
        }
        if (a.output) {
            write_file(*a.output, text);
        } else {
            out << text;
        }
        return 0;
    } catch (const Error& e) {
        emit_error(err, e.code(), e.what());
        return 1;
    }
}

int cmd_inspect_chunks(const InspectArgs& a, std::ostream& out, std::ostream& err) {
    try {
        const auto loaded = load_document(a.input, a.profile, a.profiles_dir);
        ChunkPlanConfig cc{a.stride, a.threshold, {}};
        if (a.task == "title_hierarchy") {
            cc.task_types = {ElementType::title};
        } else if (a.task == "text_truncation") {
            cc.task_types = {ElementType::text};
        } else if (a.task == "association") {
            cc.task_types = {ElementType::image, ElementType::table};
        } else {
            throw Error("cli.ConfigInvalid", "task must be title_hierarchy, text_truncation or association");
        }
        const auto profile = page_profile(loaded.doc, cc.task_types);
        Json j;
        j["doc_id"] = loaded.doc.doc_id;
        j["task"] = a.task;
        j["page_counts"] = profile.counts;
        j["plan"] = to_json(plan_chunks(profile, cc));
        out << dump_file(j);
        return 0;
    } catch (const Error& e) {
        emit_error(err, e.code(), e.what());
        return 1;
    }
}

} // namespace docstruct::cli
