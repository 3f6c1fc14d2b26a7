#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "docstruct/apply.hpp"
#include "docstruct/cli.hpp"
#include "docstruct/html_table.hpp"
#include "docstruct/ingest.hpp"
#include "docstruct/text_util.hpp"
#include "docstruct/types.hpp"

#ifndef DOCSTRUCT_CORPUS_DIR
#define DOCSTRUCT_CORPUS_DIR "tests/corpus"
#endif

namespace testsupport {

using namespace docstruct;
namespace fs = std::filesystem;

inline CanonicalElement el(std::size_t idx, ElementType t, std::string content, std::size_t page = 0,
                           BBox box = {100, 100, 900, 200}) {
    CanonicalElement e;
    e.idx = idx;
    e.etype = t;
    e.content = std::move(content);
    e.page = page;
    e.bbox = box;
    if (t == ElementType::table) e.table_html = "<table><tr><td>x</td></tr></table>";
    return e;
}

inline CanonicalElement table_el(std::size_t idx, std::string html, std::size_t page = 0,
                                 BBox box = {100, 100, 900, 300}) {
    auto e = el(idx, ElementType::table, "", page, box);
    e.table_html = std::move(html);
    return e;
}

inline CanonicalDocument doc_of(std::vector<CanonicalElement> els, std::size_t pages = 0) {
    CanonicalDocument d;
    d.doc_id = "t";
    d.source_schema = "test";
    std::size_t max_page = 0;
    for (const auto& e : els) max_page = std::max(max_page, e.page);
    d.page_count = pages ? pages : max_page + 1;
    d.elements = std::move(els);
    return d;
}

inline fs::path corpus_dir() { return DOCSTRUCT_CORPUS_DIR; }

inline std::vector<std::string> corpus_names() {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(corpus_dir() / "docs")) {
        if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

inline fs::path corpus_doc_path(const std::string& name) { return corpus_dir() / "docs" / (name + ".json"); }

inline CanonicalDocument load_corpus_doc(const std::string& name) {
    return cli::load_document(corpus_doc_path(name), "mineru", cli::default_profiles_dir()).doc;
}

inline std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// -- conservation checks ----------------------------------------------------

inline std::multiset<std::string> body_cells(const TableGrid& g) {
    std::multiset<std::string> out;
    std::vector<bool> seen(g.cells.size(), false);
    for (const auto& row : g.slots) {
        for (auto id : row) {
            if (seen[id]) continue;
            seen[id] = true;
            if (!g.cells[id].header) out.insert(g.cells[id].text);
        }
    }
    return out;
}

/// Text of all text elements in reading order, join characters stripped,
/// compared before and after merging; then per table merge, the body-cell
/// multiset of both fragments against the merged table, accounting for the
/// dropped header row and fused cells from the merge log. Returns one
/// message per violation.
inline std::vector<std::string> conservation_violations(const CanonicalDocument& input, const ResolvedDocument& rd) {
    std::vector<std::string> out;
    std::string before, after;
    for (const auto& e : input.elements) {
        if (e.etype == ElementType::text) before += e.content;
    }
    for (const auto& e : rd.doc.elements) {
        if (e.etype != ElementType::text) continue;
        if (std::find(rd.demoted.begin(), rd.demoted.end(), e.idx) != rd.demoted.end()) continue;
        after += e.content;
    }
    if (text::strip_join_chars(before) != text::strip_join_chars(after)) {
        out.push_back(input.doc_id + ": text content changed by merging");
    }

    std::set<std::size_t> merged_tables;
    for (const auto& rec : rd.merge_log) {
        if (rec.kind != MergeRecord::Kind::table) continue;
        merged_tables.insert(rec.target_idx);
        for (auto a : rec.absorbed) merged_tables.insert(a);
        const auto* up = input.find(rec.target_idx);
        const auto* lo = rec.absorbed.empty() ? nullptr : input.find(rec.absorbed.front());
        const auto* merged = rd.doc.find(rec.target_idx);
        if (!up || !lo || !merged) {
            out.push_back(input.doc_id + ": table merge references missing elements");
            continue;
        }
        const auto ug = parse_table_html(*up->table_html);
        const auto lg = parse_table_html(*lo->table_html);
        auto expected = body_cells(ug);
        for (const auto& c : body_cells(lg)) expected.insert(c);
        if (rec.header_dropped) {
            std::vector<bool> seen(lg.cells.size(), false);
            for (auto id : lg.slots.front()) {
                if (seen[id]) continue;
                seen[id] = true;
                if (lg.cells[id].header) continue;
                if (auto it = expected.find(lg.cells[id].text); it != expected.end()) expected.erase(it);
            }
        }
        for (const auto& f : rec.fused_cells) {
            for (const auto* s : {&f.upper, &f.lower}) {
                if (auto it = expected.find(*s); it != expected.end()) {
                    expected.erase(it);
                } else {
                    out.push_back(input.doc_id + ": fused cell '" + *s + "' not found in the fragments");
                }
            }
            expected.insert(f.joined);
        }
        const auto mg = parse_table_html(*merged->table_html);
        if (body_cells(mg) != expected) {
            out.push_back(input.doc_id + ": table " + std::to_string(rec.target_idx) + " cell multiset changed");
        }
        if (mg.columns() != ug.columns() || !mg.rectangular()) {
            out.push_back(input.doc_id + ": merged table " + std::to_string(rec.target_idx) + " lost its shape");
        }
    }
    for (const auto& e : rd.doc.elements) {
        if (e.etype != ElementType::table || merged_tables.count(e.idx)) continue;
        const auto* orig = input.find(e.idx);
        if (!orig || orig->table_html != e.table_html) {
            out.push_back(input.doc_id + ": unmerged table " + std::to_string(e.idx) + " changed");
        }
    }
    return out;
}

} // namespace testsupport
