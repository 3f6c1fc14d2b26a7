#include "docstruct/pipeline.hpp"

#include <algorithm>
#include <map>

#include "docstruct/filtering.hpp"
#include "docstruct/ingest.hpp"
#include "docstruct/parallel.hpp"

namespace docstruct {

std::unique_ptr<Predictor> make_predictor(const PipelineConfig& cfg) {
    if (cfg.predictor == PredictorMode::remote) {
        BackendConfig b{cfg.backend_url, cfg.backend_timeout_ms, cfg.backend_token};
        return std::make_unique<RemotePredictor>(std::move(b), cfg.filter, cfg.retries);
    }
    return std::make_unique<RuleBasedPredictor>(cfg.filter, cfg.max_title_chars);
}

std::unique_ptr<Summarizer> make_summarizer(const PipelineConfig& cfg) {
    ExtractiveSummarizer extractive(cfg.summary_sentences, cfg.summary_chars, cfg.filter);
    switch (cfg.summarizer) {
    case SummarizerMode::none: return nullptr;
    case SummarizerMode::extractive: return std::make_unique<ExtractiveSummarizer>(std::move(extractive));
    case SummarizerMode::remote: {
        BackendConfig b{cfg.summarizer_url.empty() ? cfg.backend_url : cfg.summarizer_url, cfg.backend_timeout_ms,
                        cfg.backend_token};
        return std::make_unique<RemoteSummarizer>(std::move(b), std::move(extractive), cfg.retries);
    }
    }
    return nullptr;
}

namespace {

ChunkPlan plan_for(const CanonicalDocument& doc, const PipelineConfig& cfg, std::vector<ElementType> types) {
    if (!cfg.chunking) return single_chunk_plan(doc.page_count);
    ChunkPlanConfig cc{cfg.stride, cfg.threshold, std::move(types)};
    return plan_chunks(page_profile(doc, cc.task_types), cc);
}

void append(Issues& to, const Issues& from) { to.insert(to.end(), from.begin(), from.end()); }

} // namespace

PipelineResult run_pipeline(const CanonicalDocument& doc, const PipelineConfig& cfg, Predictor& predictor,
                            Summarizer* summarizer) {
    PipelineResult out;
    auto& issues = out.issues;
    const std::size_t jobs = cfg.jobs;

    for (const auto& v : validate_document(doc).violations) {
        add_issue(issues, "ingest." + std::string(to_string(v.kind)), v.message, v.idx);
    }

    // title hierarchy
    const auto titles = filter_titles(doc);
    const auto hplan = plan_for(doc, cfg, {ElementType::title});
    std::vector<ChunkLevels> chunk_levels(hplan.chunks.size());
    std::vector<Issues> chunk_issues(hplan.chunks.size());
    parallel_for(hplan.chunks.size(), jobs, [&](std::size_t k) {
        TitleSequence sub;
        for (const auto& t : titles.items) {
            if (hplan.chunks[k].contains(t.page)) sub.items.push_back(t);
        }
        chunk_levels[k].chunk_index = k;
        if (sub.items.empty()) return;
        chunk_levels[k].levels = predictor.predict_title_hierarchy(sub, chunk_issues[k]).items;
    });
    for (const auto& is : chunk_issues) append(issues, is);
    auto sync = synchronize_hierarchy(chunk_levels);
    append(issues, sync.issues);
    out.sync_steps = sync.steps;
    HierarchyPrediction hierarchy;
    for (const auto& t : titles.items) {
        if (auto it = sync.levels.find(t.idx); it != sync.levels.end()) hierarchy.items.emplace_back(t.idx, it->second);
    }

    // text truncation
    const TextRules rules(cfg.filter);
    const auto text_cands = filter_text_truncation_candidates(doc, rules);
    const auto tplan = plan_for(doc, cfg, {ElementType::text});
    std::vector<std::vector<TextPairCandidate>> text_sub(tplan.chunks.size());
    for (const auto& c : text_cands) {
        bool placed = false;
        for (std::size_t k = 0; k < tplan.chunks.size(); ++k) {
            if (tplan.chunks[k].contains(c.src_page) && tplan.chunks[k].contains(c.tgt_page)) {
                text_sub[k].push_back(c);
                placed = true;
            }
        }
        if (placed) continue;
        add_issue(issues, "chunking.PairSpansChunks", "text pair crosses chunk boundaries; sent with its src chunk",
                  c.src_idx);
        for (std::size_t k = 0; k < tplan.chunks.size(); ++k) {
            if (tplan.chunks[k].contains(c.src_page)) {
                text_sub[k].push_back(c);
                break;
            }
        }
    }
    std::vector<ChunkPairs> text_pairs(tplan.chunks.size());
    chunk_issues.assign(tplan.chunks.size(), {});
    parallel_for(tplan.chunks.size(), jobs, [&](std::size_t k) {
        text_pairs[k].chunk_index = k;
        if (text_sub[k].empty()) return;
        text_pairs[k].pairs = predictor.predict_text_truncation(text_sub[k], chunk_issues[k]).pairs;
    });
    for (const auto& is : chunk_issues) append(issues, is);
    auto text_union = merge_union(text_pairs, PairKind::text_truncation);
    append(issues, text_union.issues);

    // association
    const auto assoc_items = filter_association_candidates(doc);
    const auto aplan = plan_for(doc, cfg, {ElementType::image, ElementType::table});
    std::vector<ChunkPairs> assoc_pairs(aplan.chunks.size());
    chunk_issues.assign(aplan.chunks.size(), {});
    parallel_for(aplan.chunks.size(), jobs, [&](std::size_t k) {
        AssocCandidates sub;
        for (const auto& it : assoc_items.items) {
            if (aplan.chunks[k].contains(it.page)) sub.items.push_back(it);
        }
        assoc_pairs[k].chunk_index = k;
        if (sub.items.empty()) return;
        assoc_pairs[k].pairs = predictor.predict_association(sub, chunk_issues[k]).pairs;
    });
    for (const auto& is : chunk_issues) append(issues, is);
    auto assoc_union = merge_union(assoc_pairs, PairKind::association);
    append(issues, assoc_union.issues);

    // table truncation, one request per candidate
    auto table_filter = filter_table_truncation_candidates(doc, cfg.filter);
    append(issues, table_filter.issues);
    const auto& table_cands = table_filter.candidates;
    std::vector<CellMergeJudgement> judgements(table_cands.size());
    chunk_issues.assign(table_cands.size(), {});
    parallel_for(table_cands.size(), jobs, [&](std::size_t k) {
        judgements[k] = predictor.predict_table_truncation(table_cands[k], chunk_issues[k]);
    });
    for (const auto& is : chunk_issues) append(issues, is);

    // apply: text, tables, levels, links
    out.resolved = resolve_start(doc);
    auto& rd = out.resolved;
    merge_text(rd, PairPrediction{text_union.pairs}, std::span<const TextPairCandidate>(text_cands));
    for (std::size_t k = 0; k < table_cands.size(); ++k) merge_tables(rd, table_cands[k], judgements[k]);
    assign_levels(rd, hierarchy);
    attach_links(rd, PairPrediction{assoc_union.pairs});
    append(issues, rd.issues);

    // tree
    auto built = build_tree(rd);
    append(issues, built.issues);
    out.tree = chunk_nodes(std::move(built.tree), cfg.node_chunk_chars, join_boundaries(rd));
    if (summarizer) append(issues, summarize_nodes(out.tree, *summarizer, jobs));

    out.chunk_plans = {{"title_hierarchy", hplan}, {"text_truncation", tplan}, {"association", aplan}};

    auto& pred = out.predictions;
    pred.doc_id = doc.doc_id;
    for (const auto& t : titles.items) {
        if (auto it = sync.levels.find(t.idx); it != sync.levels.end()) {
            pred.hierarchy.push_back({t.idx, it->second, t.content});
        }
    }
    pred.text_truncation = text_union.pairs;
    pred.association = assoc_union.pairs;
    for (std::size_t k = 0; k < table_cands.size(); ++k) {
        pred.table_truncation.push_back({table_cands[k].upper_idx, table_cands[k].lower_idx, judgements[k].columns});
    }
    return out;
}

std::string dump_file(const Json& j) { return j.dump(2) + "\n"; }

Json run_report(const PipelineResult& r, std::size_t input_elements) {
    Json j;
    j["doc_id"] = r.resolved.doc.doc_id;
    j["elements_in"] = input_elements;
    j["elements_out"] = r.resolved.doc.elements.size();
    std::size_t text_merges = 0, table_merges = 0;
    for (const auto& m : r.resolved.merge_log) (m.kind == MergeRecord::Kind::text ? text_merges : table_merges)++;
    j["text_merges"] = text_merges;
    j["table_merges"] = table_merges;
    j["titles"] = r.resolved.levels.size();
    j["demoted_titles"] = r.resolved.demoted.size();
    std::size_t nodes = 0;
    for_each_node(r.tree.root, [&](const DocNode&) { ++nodes; });
    j["tree_nodes"] = nodes;
    std::map<std::string, std::size_t> counts;
    for (const auto& i : r.issues) ++counts[i.code];
    Json by_code = Json::object();
    for (const auto& [code, n] : counts) by_code[code] = n;
    j["warning_count"] = r.issues.size();
    j["warnings_by_code"] = std::move(by_code);
    j["warnings"] = to_json(r.issues);
    return j;
}

Artifacts render_artifacts(const PipelineResult& r, const PipelineConfig& cfg, std::size_t input_elements) {
    Artifacts a;
    if (cfg.format != ExportFormat::markdown) a.tree_json = dump_file(tree_to_json(r.tree));
    if (cfg.format != ExportFormat::json) a.markdown = export_markdown(r.tree);
    if (cfg.merge_log) a.merge_log = dump_file(merge_log_json(r.resolved));
    if (cfg.chunk_plan) {
        Json plans = Json::object();
        for (const auto& t : r.chunk_plans) plans[t.task] = to_json(t.plan);
        Json steps = Json::array();
        for (const auto& s : r.sync_steps) {
            steps.push_back(Json{{"chunk_index", s.chunk_index},
                                 {"deviation", s.deviation},
                                 {"overlap_titles", s.overlap_titles},
                                 {"empty_overlap", s.empty_overlap}});
        }
        a.chunk_plan = dump_file(Json{{"doc_id", r.resolved.doc.doc_id}, {"plans", std::move(plans)},
                                      {"sync_steps", std::move(steps)}});
    }
    a.predictions = dump_file(to_json(r.predictions));
    a.report = dump_file(run_report(r, input_elements));
    return a;
}

} // namespace docstruct
