#include "docstruct/apply.hpp"

#include <algorithm>
#include <set>

#include "docstruct/ingest.hpp"
#include "docstruct/text_util.hpp"

namespace docstruct {

std::string_view to_string(MergeRecord::Kind k) { return k == MergeRecord::Kind::text ? "text" : "table"; }

std::size_t ResolvedDocument::resolve(std::size_t idx) const {
    for (std::size_t guard = 0; guard <= alias.size(); ++guard) {
        const auto it = alias.find(idx);
        if (it == alias.end()) return idx;
        idx = it->second;
    }
    return idx;
}

ResolvedDocument resolve_start(CanonicalDocument doc) {
    ResolvedDocument rd;
    rd.doc = std::move(doc);
    return rd;
}

namespace {

std::string pair_text(std::size_t a, std::size_t b) {
    return "(" + std::to_string(a) + ", " + std::to_string(b) + ")";
}

std::string join_nonempty(const std::string& a, const std::string& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return text::join_fragments(a, b);
}

} // namespace

void merge_text(ResolvedDocument& rd, const PairPrediction& pairs,
                std::optional<std::span<const TextPairCandidate>> candidates) {
    std::set<std::pair<std::size_t, std::size_t>> allowed;
    if (candidates) {
        for (const auto& c : *candidates) allowed.emplace(c.src_idx, c.tgt_idx);
    }
    auto& doc = rd.doc;

    std::vector<std::pair<std::size_t, std::size_t>> sorted = pairs.pairs;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::map<std::size_t, std::size_t> next_of;
    std::set<std::size_t> has_prev;
    for (const auto& [src, tgt] : sorted) {
        if (candidates && !allowed.count({src, tgt})) {
            add_issue(rd.issues, "apply.PairNotAdjacent", "pair " + pair_text(src, tgt) + " is not a candidate", src);
            continue;
        }
        const auto ps = doc.position_of(src);
        const auto pt = doc.position_of(tgt);
        if (!ps || !pt || doc.elements[*ps].etype != ElementType::text ||
            doc.elements[*pt].etype != ElementType::text || *ps >= *pt) {
            add_issue(rd.issues, "apply.PairNotAdjacent",
                      "pair " + pair_text(src, tgt) + " does not join two text elements in reading order", src);
            continue;
        }
        if (next_of.count(src) || has_prev.count(tgt)) {
            add_issue(rd.issues, "apply.ChainConflict",
                      "pair " + pair_text(src, tgt) + " would branch a merge chain; skipped", src);
            continue;
        }
        next_of.emplace(src, tgt);
        has_prev.insert(tgt);
    }
    if (next_of.empty()) return;

    std::set<std::size_t> absorbed;
    for (auto& e : doc.elements) {
        if (has_prev.count(e.idx) || !next_of.count(e.idx)) continue;
        MergeRecord rec;
        rec.kind = MergeRecord::Kind::text;
        rec.target_idx = e.idx;
        for (auto it = next_of.find(e.idx); it != next_of.end(); it = next_of.find(it->second)) {
            const auto* next = doc.find(it->second);
            e.content = join_nonempty(e.content, next->content);
            rec.absorbed.push_back(next->idx);
            rec.absorbed_bboxes.push_back({next->page, next->bbox});
            absorbed.insert(next->idx);
            rd.alias[next->idx] = e.idx;
        }
        rd.merge_log.push_back(std::move(rec));
    }
    std::erase_if(doc.elements, [&](const CanonicalElement& e) { return absorbed.count(e.idx) > 0; });
}

TableMergeOutcome merge_table_grids(const TableGrid& upper, const TableGrid& lower, std::span<const int> judgement) {
    if (upper.columns() != lower.columns()) {
        throw Error("apply.ColumnMismatch", "tables have " + std::to_string(upper.columns()) + " and " +
                                                std::to_string(lower.columns()) + " columns");
    }
    if (judgement.size() != upper.columns()) {
        throw Error("apply.ColumnMismatch", "judgement has " + std::to_string(judgement.size()) +
                                                " entries for " + std::to_string(upper.columns()) + " columns");
    }
    TableMergeOutcome out;
    TableGrid low = lower;
    if (upper.rows() > 0 && low.rows() > 0 && low.row_texts(0) == upper.row_texts(0)) {
        low.erase_row(0);
        out.header_dropped = true;
    }

    TableGrid& g = out.grid;
    g.cells = upper.cells;
    g.slots = upper.slots;
    const std::size_t offset = g.cells.size();
    g.cells.insert(g.cells.end(), low.cells.begin(), low.cells.end());
    for (auto row : low.slots) {
        for (auto& id : row) id += offset;
        g.slots.push_back(std::move(row));
    }
    if (upper.rows() == 0 || low.rows() == 0) {
        g.canonicalize();
        return out;
    }

    const std::size_t ru = upper.rows() - 1;
    const std::size_t rl = upper.rows();
    const auto regs = g.regions();
    std::set<std::size_t> fused;
    for (std::size_t j = 0; j < judgement.size(); ++j) {
        if (judgement[j] != 1) continue;
        const auto a = g.slots[ru][j];
        const auto b = g.slots[rl][j];
        if (fused.count(a)) continue;
        if (regs[a].col != regs[b].col || regs[a].col_span != regs[b].col_span) {
            out.skipped.push_back("column " + std::to_string(j) + ": boundary cells cover different columns");
            continue;
        }
        fused.insert(a);
        FusedCell fc{g.cells[a].text, g.cells[b].text, join_nonempty(g.cells[a].text, g.cells[b].text)};
        g.cells[a].text = fc.joined;
        out.fused_cells.push_back(std::move(fc));
        for (auto& row : g.slots) {
            for (auto& id : row) {
                if (id == b) id = a;
            }
        }
    }
    if (g.slots[ru] == g.slots[rl]) {
        g.erase_row(rl);
    } else {
        g.canonicalize();
    }
    return out;
}

void merge_tables(ResolvedDocument& rd, const TablePairCandidate& candidate, const CellMergeJudgement& judgement) {
    if (!judgement.continuation()) return;
    const auto up_idx = rd.resolve(candidate.upper_idx);
    const auto lo_idx = rd.resolve(candidate.lower_idx);
    auto* up = rd.doc.find(up_idx);
    auto* lo = rd.doc.find(lo_idx);
    const auto label = pair_text(candidate.upper_idx, candidate.lower_idx);
    if (up_idx == lo_idx || !up || !lo || up->etype != ElementType::table || lo->etype != ElementType::table ||
        !up->table_html || !lo->table_html) {
        add_issue(rd.issues, "apply.TableMissing", "table pair " + label + " does not name two tables",
                  candidate.upper_idx);
        return;
    }
    TableMergeOutcome merged;
    try {
        merged = merge_table_grids(parse_table_html(*up->table_html), parse_table_html(*lo->table_html),
                                   judgement.columns);
    } catch (const Error& e) {
        add_issue(rd.issues, e.code(), "table pair " + label + ": " + e.what(), candidate.upper_idx);
        return;
    }
    MergeRecord rec;
    rec.kind = MergeRecord::Kind::table;
    rec.target_idx = up_idx;
    rec.absorbed = {lo_idx};
    rec.absorbed_bboxes = {{lo->page, lo->bbox}};
    rec.judgement = judgement.columns;
    rec.header_dropped = merged.header_dropped;
    rec.fused_cells = std::move(merged.fused_cells);
    rec.skipped = std::move(merged.skipped);
    for (const auto& s : rec.skipped) add_issue(rd.issues, "apply.FusionSkipped", "table pair " + label + ": " + s, up_idx);

    up->table_html = to_html(merged.grid);
    up->content = join_nonempty(up->content, lo->content);
    rd.alias[lo_idx] = up_idx;
    rd.merge_log.push_back(std::move(rec));
    std::erase_if(rd.doc.elements, [&](const CanonicalElement& e) { return e.idx == lo_idx; });
}

void assign_levels(ResolvedDocument& rd, const HierarchyPrediction& levels) {
    for (const auto& [idx, level] : levels.items) {
        auto* e = rd.doc.find(idx);
        if (!e || e->etype != ElementType::title) {
            add_issue(rd.issues, "apply.UnknownIdx", "level given for idx that is not a title", idx);
            continue;
        }
        if (level == -1) {
            e->etype = ElementType::text;
            rd.demoted.push_back(idx);
            rd.levels.erase(idx);
            continue;
        }
        if (level < 1) {
            add_issue(rd.issues, "apply.UnknownIdx", "level " + std::to_string(level) + " is not valid", idx);
            continue;
        }
        rd.levels[idx] = level;
    }
    int previous = 1;
    for (const auto& e : rd.doc.elements) {
        if (e.etype != ElementType::title) continue;
        auto [it, inserted] = rd.levels.emplace(e.idx, previous);
        if (inserted) {
            add_issue(rd.issues, "apply.UnknownTitle",
                      "title has no predicted level; using " + std::to_string(previous), e.idx);
        }
        previous = it->second;
    }
}

void attach_links(ResolvedDocument& rd, const PairPrediction& assoc) {
    for (const auto& [raw_src, raw_tgt] : assoc.pairs) {
        const auto src = rd.resolve(raw_src);
        const auto tgt = rd.resolve(raw_tgt);
        const auto* s = rd.doc.find(src);
        const auto* t = rd.doc.find(tgt);
        if (!s || !t) {
            add_issue(rd.issues, "apply.UnknownIdx", "link " + pair_text(raw_src, raw_tgt) + " names a missing element",
                      raw_src);
            continue;
        }
        if (!wire::link_allowed(s->etype, t->etype)) {
            add_issue(rd.issues, "apply.TypeRuleViolation",
                      std::string(to_string(s->etype)) + " cannot link to " + std::string(to_string(t->etype)), src);
            continue;
        }
        auto& map = is_visual(s->etype) ? rd.section_links : rd.caption_links;
        auto [it, inserted] = map.emplace(src, tgt);
        if (!inserted && it->second != tgt) {
            add_issue(rd.issues, "apply.DuplicateLink",
                      "link " + pair_text(src, tgt) + " ignored; already linked to " + std::to_string(it->second),
                      src);
        }
    }
    for (const auto& e : rd.doc.elements) {
        if (is_visual(e.etype) && !rd.section_links.count(e.idx)) {
            add_issue(rd.issues, "apply.UnlinkedVisual", "visual has no governing title", e.idx);
        }
    }
}

Json to_json(const MergeRecord& r) {
    Json j;
    j["kind"] = std::string(to_string(r.kind));
    j["target_idx"] = r.target_idx;
    j["absorbed"] = r.absorbed;
    Json boxes = Json::array();
    for (const auto& pb : r.absorbed_bboxes) {
        boxes.push_back(Json{{"page", pb.page}, {"bbox", to_json(pb.bbox)}});
    }
    j["absorbed_bboxes"] = std::move(boxes);
    if (r.kind == MergeRecord::Kind::table) {
        j["judgement"] = r.judgement;
        j["header_dropped"] = r.header_dropped;
        Json cells = Json::array();
        for (const auto& c : r.fused_cells) {
            cells.push_back(Json{{"upper", c.upper}, {"lower", c.lower}, {"joined", c.joined}});
        }
        j["fused_cells"] = std::move(cells);
        j["skipped"] = r.skipped;
    }
    return j;
}

Json merge_log_json(const ResolvedDocument& rd) {
    Json j;
    j["doc_id"] = rd.doc.doc_id;
    Json merges = Json::array();
    for (const auto& r : rd.merge_log) merges.push_back(to_json(r));
    j["merges"] = std::move(merges);
    Json alias = Json::array();
    for (const auto& [from, to] : rd.alias) alias.push_back(Json{{"from", from}, {"to", rd.resolve(to)}});
    j["alias"] = std::move(alias);
    j["demoted"] = rd.demoted;
    return j;
}

Json to_json(const Issues& issues) {
    Json arr = Json::array();
    for (const auto& i : issues) {
        Json j;
        j["code"] = i.code;
        j["message"] = i.message;
        if (i.idx) j["idx"] = *i.idx;
        arr.push_back(std::move(j));
    }
    return arr;
}

} // namespace docstruct
