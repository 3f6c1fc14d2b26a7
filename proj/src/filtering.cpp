#include "docstruct/filtering.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "docstruct/html_table.hpp"
#include "docstruct/text_util.hpp"

namespace docstruct {

namespace {

std::vector<std::string> string_list(const Json& j, const char* key) {
    if (!j.is_array()) throw Error("cli.ConfigInvalid", std::string("filters.") + key + " must be an array");
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw Error("cli.ConfigInvalid", std::string("filters.") + key + " must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

FilteredItem item_of(const CanonicalElement& e) {
    return FilteredItem{e.idx, e.etype, e.content, e.page, e.bbox};
}

// Strips trailing closers; returns the remaining view.
std::string_view strip_closers(std::string_view s, const std::vector<std::string>& closers) {
    bool changed = true;
    while (changed && !s.empty()) {
        changed = false;
        for (const auto& c : closers) {
            if (!c.empty() && text::ends_with(s, c)) {
                s.remove_suffix(c.size());
                s = text::trim(s);
                changed = true;
                break;
            }
        }
    }
    return s;
}

bool is_ascii(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

} // namespace

FilterConfig filter_config_from_json(const Json& j) {
    FilterConfig cfg;
    if (!j.is_object()) throw Error("cli.ConfigInvalid", "filters must be an object");
    for (const auto& [key, v] : j.items()) {
        if (key == "terminators") cfg.terminators = string_list(v, "terminators");
        else if (key == "closers") cfg.closers = string_list(v, "closers");
        else if (key == "prefix_patterns") cfg.prefix_patterns = string_list(v, "prefix_patterns");
        else if (key == "uppercase_opener") cfg.uppercase_opener = v.get<bool>();
        else if (key == "sentence_char_cap") cfg.sentence_char_cap = v.get<std::size_t>();
        else if (key == "width_band") {
            if (!v.is_array() || v.size() != 2) throw Error("cli.ConfigInvalid", "filters.width_band must be [low, high]");
            cfg.width_band_low = v[0].get<double>();
            cfg.width_band_high = v[1].get<double>();
        } else if (key == "continuation_markers") cfg.continuation_markers = string_list(v, "continuation_markers");
        else if (key == "row_window") cfg.row_window = v.get<std::size_t>();
        else throw Error("cli.ConfigInvalid", "unknown key filters." + key);
    }
    if (cfg.sentence_char_cap == 0) throw Error("cli.ConfigInvalid", "filters.sentence_char_cap must be > 0");
    if (!(cfg.width_band_low > 0 && cfg.width_band_low <= 1.0 && cfg.width_band_high >= 1.0)) {
        throw Error("cli.ConfigInvalid", "filters.width_band must satisfy 0 < low <= 1 <= high");
    }
    if (cfg.row_window == 0) throw Error("cli.ConfigInvalid", "filters.row_window must be >= 1");
    for (const auto& p : cfg.prefix_patterns) {
        try {
            std::regex re(p);
        } catch (const std::regex_error&) {
            throw Error("cli.ConfigInvalid", "invalid prefix pattern: " + p);
        }
    }
    return cfg;
}

Json to_json(const FilterConfig& cfg) {
    Json j;
    j["terminators"] = cfg.terminators;
    j["closers"] = cfg.closers;
    j["prefix_patterns"] = cfg.prefix_patterns;
    j["uppercase_opener"] = cfg.uppercase_opener;
    j["sentence_char_cap"] = cfg.sentence_char_cap;
    j["width_band"] = Json::array({cfg.width_band_low, cfg.width_band_high});
    j["continuation_markers"] = cfg.continuation_markers;
    j["row_window"] = cfg.row_window;
    return j;
}

TextRules::TextRules(const FilterConfig& cfg) : cfg_(cfg) {
    for (const auto& p : cfg_.prefix_patterns) prefixes_.emplace_back(p);
}

bool TextRules::ends_clean(std::string_view t) const {
    auto s = strip_closers(text::trim(t), cfg_.closers);
    return std::any_of(cfg_.terminators.begin(), cfg_.terminators.end(),
                       [&](const std::string& term) { return !term.empty() && text::ends_with(s, term); });
}

bool TextRules::has_prefix(std::string_view t) const {
    const std::string s(text::trim(t));
    return std::any_of(prefixes_.begin(), prefixes_.end(), [&](const std::regex& re) {
        return std::regex_search(s, re, std::regex_constants::match_continuous);
    });
}

bool TextRules::opens_sentence(std::string_view t) const {
    return cfg_.uppercase_opener && text::is_ascii_upper(text::first_codepoint(text::trim(t)));
}

std::vector<std::string> TextRules::sentences(std::string_view t) const {
    std::vector<std::string> out;
    const std::string_view s = text::trim(t);
    std::size_t start = 0;
    std::size_t pos = 0;
    auto emit = [&](std::size_t end) {
        auto piece = text::trim(s.substr(start, end - start));
        if (!piece.empty()) out.emplace_back(piece);
        start = end;
    };
    while (pos < s.size()) {
        const std::string* hit = nullptr;
        for (const auto& term : cfg_.terminators) {
            if (!term.empty() && s.substr(pos, term.size()) == term) {
                hit = &term;
                break;
            }
        }
        if (!hit) {
            text::decode_next(s, pos);
            continue;
        }
        std::size_t end = pos + hit->size();
        bool more = true;
        while (more) {
            more = false;
            for (const auto& c : cfg_.closers) {
                if (!c.empty() && s.substr(end, c.size()) == c) {
                    end += c.size();
                    more = true;
                    break;
                }
            }
        }
        const bool at_end = end >= s.size();
        const bool ascii_term = is_ascii(*hit);
        std::size_t probe = end;
        const bool space_next = !at_end && text::is_space(text::decode_next(s, probe));
        if (at_end || !ascii_term || space_next) emit(end);
        pos = end;
    }
    emit(s.size());
    return out;
}

std::string TextRules::first_sentence(std::string_view t) const {
    auto all = sentences(t);
    if (all.empty()) return {};
    return text::take_front(all.front(), cfg_.sentence_char_cap);
}

std::string TextRules::last_sentence(std::string_view t) const {
    auto all = sentences(t);
    if (all.empty()) return {};
    return text::take_back(all.back(), cfg_.sentence_char_cap);
}

std::string_view to_string(BoundaryKind k) {
    switch (k) {
    case BoundaryKind::page_break: return "page_break";
    case BoundaryKind::column_break: return "column_break";
    case BoundaryKind::interleaved_block: return "interleaved_block";
    case BoundaryKind::same_flow: return "same_flow";
    }
    return "same_flow";
}

TitleSequence filter_titles(const CanonicalDocument& doc) {
    TitleSequence seq;
    for (const auto& e : doc.elements) {
        if (e.etype == ElementType::title) seq.items.push_back(item_of(e));
    }
    return seq;
}

AssocCandidates filter_association_candidates(const CanonicalDocument& doc) {
    AssocCandidates out;
    for (const auto& e : doc.elements) {
        if (e.etype == ElementType::title || is_visual(e.etype) || is_visual_annotation(e.etype)) {
            out.items.push_back(item_of(e));
        }
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> adjacent_text_pairs(const CanonicalDocument& doc) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::optional<std::size_t> prev;
    for (const auto& e : doc.elements) {
        if (e.etype != ElementType::text) continue;
        if (prev) out.emplace_back(*prev, e.idx);
        prev = e.idx;
    }
    return out;
}

std::vector<TextPairCandidate> filter_text_truncation_candidates(const CanonicalDocument& doc,
                                                                 const TextRules& rules) {
    std::vector<TextPairCandidate> out;
    std::optional<std::size_t> prev_pos;
    for (std::size_t i = 0; i < doc.elements.size(); ++i) {
        const auto& tgt = doc.elements[i];
        if (tgt.etype != ElementType::text) continue;
        if (!prev_pos) {
            prev_pos = i;
            continue;
        }
        const auto& src = doc.elements[*prev_pos];
        const bool excluded =
            rules.ends_clean(src.content) && (rules.has_prefix(tgt.content) || rules.opens_sentence(tgt.content));
        if (!excluded) {
            TextPairCandidate c;
            c.src_idx = src.idx;
            c.tgt_idx = tgt.idx;
            c.src_tail = rules.last_sentence(src.content);
            c.tgt_head = rules.first_sentence(tgt.content);
            c.src_page = src.page;
            c.tgt_page = tgt.page;
            c.src_bbox = src.bbox;
            c.tgt_bbox = tgt.bbox;
            if (src.page != tgt.page) {
                c.boundary_kind = BoundaryKind::page_break;
            } else if (i - *prev_pos > 1) {
                c.boundary_kind = BoundaryKind::interleaved_block;
            } else if (tgt.bbox.x0 >= src.bbox.x1 || tgt.bbox.y1 <= src.bbox.y0) {
                c.boundary_kind = BoundaryKind::column_break;
            } else {
                c.boundary_kind = BoundaryKind::same_flow;
            }
            out.push_back(std::move(c));
        }
        prev_pos = i;
    }
    return out;
}

const CanonicalElement* table_caption_of(const CanonicalDocument& doc, std::size_t table_idx) {
    auto pos = doc.position_of(table_idx);
    if (!pos) return nullptr;
    const auto page = doc.elements[*pos].page;
    for (std::size_t i = *pos; i-- > 0;) {
        const auto& e = doc.elements[i];
        if (e.page != page) break;
        if (is_independent(e.etype)) continue;
        if (e.etype == ElementType::table_caption) return &e;
        break;
    }
    for (std::size_t i = *pos + 1; i < doc.elements.size(); ++i) {
        const auto& e = doc.elements[i];
        if (e.page != page) break;
        if (is_independent(e.etype)) continue;
        if (e.etype == ElementType::table_caption) return &e;
        break;
    }
    return nullptr;
}

bool has_continuation_marker(std::string_view caption, const std::vector<std::string>& markers) {
    const auto lower = text::to_lower_ascii(caption);
    return std::any_of(markers.begin(), markers.end(), [&](const std::string& m) {
        return !m.empty() && lower.find(text::to_lower_ascii(m)) != std::string::npos;
    });
}

TableFilterResult filter_table_truncation_candidates(const CanonicalDocument& doc,
                                                     const FilterConfig& cfg) {
    TableFilterResult result;
    if (doc.elements.empty()) return result;

    // last boundary table per page, first boundary table per page
    std::map<std::size_t, std::size_t> last_on_page;
    std::map<std::size_t, std::size_t> first_on_page;
    for (std::size_t i = 0; i < doc.elements.size(); ++i) {
        const auto& e = doc.elements[i];
        if (e.etype != ElementType::table) continue;
        bool trailing_ok = true;
        for (std::size_t k = i + 1; k < doc.elements.size() && doc.elements[k].page == e.page; ++k) {
            const auto t = doc.elements[k].etype;
            if (!(is_independent(t) || t == ElementType::table_caption || t == ElementType::table_footnote)) {
                trailing_ok = false;
                break;
            }
        }
        if (trailing_ok) last_on_page[e.page] = i;
        bool leading_ok = true;
        for (std::size_t k = i; k-- > 0 && doc.elements[k].page == e.page;) {
            const auto t = doc.elements[k].etype;
            if (!(is_independent(t) || t == ElementType::table_caption)) {
                leading_ok = false;
                break;
            }
        }
        if (leading_ok && !first_on_page.count(e.page)) first_on_page[e.page] = i;
    }

    std::map<std::size_t, TableGrid> grids;
    std::set<std::size_t> broken;
    auto grid_of = [&](std::size_t pos) -> const TableGrid* {
        const auto& e = doc.elements[pos];
        if (broken.count(e.idx)) return nullptr;
        if (auto it = grids.find(e.idx); it != grids.end()) return &it->second;
        try {
            return &grids.emplace(e.idx, parse_table_html(e.table_html.value_or(""))).first->second;
        } catch (const Error& err) {
            broken.insert(e.idx);
            add_issue(result.issues, "filtering.TableHtmlUnparseable", err.what(), e.idx);
            return nullptr;
        }
    };

    for (const auto& [page, upper_pos] : last_on_page) {
        auto lower_it = first_on_page.find(page + 1);
        if (lower_it == first_on_page.end()) continue;
        const auto lower_pos = lower_it->second;
        const auto& upper = doc.elements[upper_pos];
        const auto& lower = doc.elements[lower_pos];

        const TableGrid* ug = grid_of(upper_pos);
        const TableGrid* lg = grid_of(lower_pos);
        if (!ug || !lg) continue;

        TablePairCandidate c;
        c.upper_idx = upper.idx;
        c.lower_idx = lower.idx;
        c.upper_page = upper.page;
        c.lower_page = lower.page;
        if (auto* cap = table_caption_of(doc, upper.idx)) c.upper_caption = cap->content;
        if (auto* cap = table_caption_of(doc, lower.idx)) c.lower_caption = cap->content;
        c.width_ratio = lower.bbox.width() / upper.bbox.width();
        c.upper_columns = ug->columns();
        c.lower_columns = lg->columns();
        c.continuation_marker =
            c.lower_caption && has_continuation_marker(*c.lower_caption, cfg.continuation_markers);

        const bool width_ok = c.width_ratio >= cfg.width_band_low && c.width_ratio <= cfg.width_band_high;
        const bool columns_ok = c.upper_columns == c.lower_columns || c.continuation_marker;
        if (!width_ok || !columns_ok) continue;

        const std::size_t w = cfg.row_window;
        const std::size_t ufirst = ug->rows() > w ? ug->rows() - w : 0;
        c.upper_rows_html = rows_to_html(*ug, ufirst, w);
        c.lower_rows_html = rows_to_html(*lg, 0, w);
        for (std::size_t r = ufirst; r < ug->rows(); ++r) c.upper_rows.push_back(ug->row_texts(r));
        for (std::size_t r = 0; r < std::min(w, lg->rows()); ++r) c.lower_rows.push_back(lg->row_texts(r));
        c.upper_header = ug->row_texts(0);
        result.candidates.push_back(std::move(c));
    }
    return result;
}

} // namespace docstruct
