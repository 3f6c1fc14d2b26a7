#include "docstruct/predictors.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>

#include "docstruct/ingest.hpp"
#include "docstruct/text_util.hpp"

namespace docstruct {

namespace {

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ascii_alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }

bool is_cn_numeral(char32_t c) {
    static constexpr std::u32string_view kNumerals = U"〇零一二三四五六七八九十百千两";
    return kNumerals.find(c) != std::u32string_view::npos;
}

bool is_roman(char c, bool upper) {
    static constexpr std::string_view kUpper = "IVXLCDM";
    static constexpr std::string_view kLower = "ivxlcdm";
    return (upper ? kUpper : kLower).find(c) != std::string_view::npos;
}

// Digits or CJK numerals from pos; returns true when at least one was read.
bool skip_numerals(std::string_view s, std::size_t& pos) {
    const std::size_t start = pos;
    while (pos < s.size()) {
        if (is_ascii_digit(s[pos])) {
            ++pos;
            continue;
        }
        std::size_t next = pos;
        const char32_t c = text::decode_next(s, next);
        if (!is_cn_numeral(c)) break;
        pos = next;
    }
    return pos > start;
}

bool boundary_after(std::string_view s, std::size_t pos) {
    if (pos >= s.size()) return true;
    std::size_t p = pos;
    const char32_t c = text::decode_next(s, p);
    return !(c < 0x80 && is_ascii_alpha(static_cast<char>(c)));
}

std::optional<std::string> cn_shape(std::string_view s) {
    std::size_t pos = 0;
    if (text::starts_with(s, "第")) {
        pos = std::string_view("第").size();
        if (!skip_numerals(s, pos)) return std::nullopt;
        const auto rest = s.substr(pos);
        if (text::starts_with(rest, "章") || text::starts_with(rest, "部分") || text::starts_with(rest, "篇")) {
            return "cn_chapter";
        }
        if (text::starts_with(rest, "节")) return "cn_section";
        if (text::starts_with(rest, "条")) return "cn_article";
        return std::nullopt;
    }
    for (std::string_view open : {"（", "("}) {
        if (!text::starts_with(s, open)) continue;
        pos = open.size();
        std::size_t probe = pos;
        const char32_t c = text::decode_next(s, probe);
        if (!is_cn_numeral(c)) return std::nullopt;
        skip_numerals(s, pos);
        const auto rest = s.substr(pos);
        if (text::starts_with(rest, "）") || text::starts_with(rest, ")")) return "paren_cn";
        return std::nullopt;
    }
    {
        std::size_t probe = 0;
        if (is_cn_numeral(text::decode_next(s, probe))) {
            pos = 0;
            skip_numerals(s, pos);
            if (text::starts_with(s.substr(pos), "、")) return "cn_enum";
        }
    }
    return std::nullopt;
}

} // namespace

std::string title_shape(std::string_view title) {
    const auto s = text::trim(title);
    if (s.empty()) return "empty";

    if (auto cn = cn_shape(s)) return *cn;

    const auto lower = text::to_lower_ascii(s.substr(0, std::min<std::size_t>(s.size(), 12)));
    for (std::string_view kw : {"chapter", "part", "section", "appendix"}) {
        if (text::starts_with(lower, kw) && boundary_after(lower, kw.size())) {
            return "kw:" + std::string(kw);
        }
    }

    // (1) (a) (iv)
    if (s.front() == '(' || text::starts_with(s, "（")) {
        std::size_t pos = s.front() == '(' ? 1 : std::string_view("（").size();
        std::size_t start = pos;
        while (pos < s.size() && (is_ascii_digit(s[pos]) || is_ascii_alpha(s[pos]))) ++pos;
        const auto rest = s.substr(pos);
        if (pos > start && pos - start <= 4 && (text::starts_with(rest, ")") || text::starts_with(rest, "）"))) {
            return is_ascii_digit(s[start]) ? "paren_num" : "paren_letter";
        }
    }

    if (is_ascii_digit(s.front())) {
        std::size_t pos = 0;
        std::size_t depth = 0;
        std::size_t first_len = 0;
        bool trailing_dot = false;
        while (true) {
            const std::size_t start = pos;
            while (pos < s.size() && is_ascii_digit(s[pos])) ++pos;
            if (pos == start) break;
            if (depth == 0) first_len = pos - start;
            ++depth;
            trailing_dot = false;
            if (pos < s.size() && s[pos] == '.') {
                ++pos;
                trailing_dot = true;
                continue;
            }
            break;
        }
        if (pos < s.size() && s[pos] == ')') return "num_paren";
        if (trailing_dot || depth > 1) return "dec:" + std::to_string(depth);
        if (first_len <= 2 && pos < s.size()) {
            std::size_t p = pos;
            if (text::is_space(text::decode_next(s, p))) return "dec:1";
        }
        return "plain";
    }

    if (is_ascii_alpha(s.front())) {
        const bool upper = s.front() >= 'A' && s.front() <= 'Z';
        std::size_t pos = 0;
        while (pos < s.size() && is_roman(s[pos], upper)) ++pos;
        const bool roman_run = pos > 0 && pos < s.size() && (s[pos] == '.' || s[pos] == ')');
        if (roman_run && (pos >= 2 || s.front() == 'I' || s.front() == 'i')) {
            return upper ? "roman_upper" : "roman_lower";
        }
        if (s.size() >= 2 && (s[1] == '.' || s[1] == ')') && boundary_after(s, 2)) {
            return upper ? "letter_upper" : "letter_lower";
        }
        return "plain";
    }

    {
        std::size_t p = 0;
        const char32_t c = text::decode_next(s, p);
        static constexpr std::u32string_view kBullets = U"•·▪◦●○■□–—-*";
        if (kBullets.find(c) != std::u32string_view::npos) return "bullet";
    }
    return "plain";
}

RuleBasedPredictor::RuleBasedPredictor(const FilterConfig& cfg, std::size_t max_title_chars)
    : rules_(cfg), max_title_chars_(max_title_chars) {}

HierarchyPrediction RuleBasedPredictor::predict_title_hierarchy(const TitleSequence& req, Issues&) {
    HierarchyPrediction out;
    auto usable = [&](std::string_view body) {
        return !body.empty() && text::codepoint_count(body) <= max_title_chars_;
    };
    // Decimal numbering places a title by its dot depth relative to the
    // shallowest decimal title in the request.
    auto dec_depth = [](const std::string& shape) -> std::size_t {
        return shape.rfind("dec:", 0) == 0 ? std::stoul(shape.substr(4)) : 0;
    };
    std::size_t min_dec = 0;
    for (const auto& item : req.items) {
        const auto body = text::trim(item.content);
        if (!usable(body)) continue;
        if (const auto d = dec_depth(title_shape(body)); d && (!min_dec || d < min_dec)) min_dec = d;
    }

    const std::string gap = "\x01gap";
    std::vector<std::string> stack;
    for (const auto& item : req.items) {
        const auto body = text::trim(item.content);
        if (!usable(body)) {
            out.items.emplace_back(item.idx, -1);
            continue;
        }
        const auto shape = title_shape(body);
        if (const auto d = dec_depth(shape)) {
            auto first = std::find_if(stack.begin(), stack.end(),
                                      [&](const std::string& s) { return dec_depth(s) != 0; });
            auto base = static_cast<std::size_t>(first - stack.begin());
            if (first != stack.end()) base -= dec_depth(*first) - min_dec;
            stack.resize(base + (d - min_dec), gap);
            stack.push_back(shape);
        } else if (const auto it = std::find(stack.begin(), stack.end(), shape); it != stack.end()) {
            stack.erase(it + 1, stack.end());
        } else {
            stack.push_back(shape);
        }
        out.items.emplace_back(item.idx, static_cast<int>(stack.size()));
    }
    return out;
}

PairPrediction RuleBasedPredictor::predict_text_truncation(std::span<const TextPairCandidate> req, Issues&) {
    PairPrediction out;
    for (const auto& c : req) {
        const auto tail = text::trim(c.src_tail);
        const auto head = text::trim(c.tgt_head);
        if (tail.empty() || head.empty()) continue;
        if (rules_.ends_clean(tail) || rules_.has_prefix(head)) continue;
        const char32_t last = text::last_codepoint(tail);
        const char32_t first = text::first_codepoint(head);
        bool hyphenated = false;
        if (last == U'-' && tail.size() >= 2) {
            hyphenated = text::is_letter(text::last_codepoint(tail.substr(0, tail.size() - 1)));
        }
        if (text::is_ascii_lower(first) || hyphenated || (text::is_cjk(last) && text::is_cjk(first))) {
            out.pairs.emplace_back(c.src_idx, c.tgt_idx);
        }
    }
    return out;
}

namespace {

std::size_t idx_distance(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

// Closer by idx wins; on ties the preferred side decides.
bool better_visual(const FilteredItem& cand, const FilteredItem* best, std::size_t anchor, bool prefer_following) {
    if (!best) return true;
    const auto dc = idx_distance(cand.idx, anchor);
    const auto db = idx_distance(best->idx, anchor);
    if (dc != db) return dc < db;
    return prefer_following ? cand.idx > anchor : cand.idx < anchor;
}

} // namespace

PairPrediction RuleBasedPredictor::predict_association(const AssocCandidates& req, Issues& issues) {
    PairPrediction out;
    const FilteredItem* last_title = nullptr;
    for (const auto& item : req.items) {
        if (item.etype == ElementType::title) {
            last_title = &item;
        } else if (is_visual(item.etype) && last_title) {
            out.pairs.emplace_back(item.idx, last_title->idx);
        }
    }

    for (const auto& a : req.items) {
        const auto target = annotation_target(a.etype);
        if (!target) continue;
        const bool prefer_following = a.etype == ElementType::table_caption;
        const FilteredItem* best = nullptr;
        for (const auto& v : req.items) {
            if (v.etype == *target && v.page == a.page && better_visual(v, best, a.idx, prefer_following)) best = &v;
        }
        if (!best) {
            for (const auto& v : req.items) {
                if (v.etype != *target || idx_distance(v.page, a.page) != 1) continue;
                if (better_visual(v, best, a.idx, prefer_following)) best = &v;
            }
        }
        if (best) {
            out.pairs.emplace_back(a.idx, best->idx);
        } else {
            add_issue(issues, "predictors.UnresolvedCaption",
                      std::string(to_string(a.etype)) + " has no " + std::string(to_string(*target)) +
                          " on its page or the adjacent pages",
                      a.idx);
        }
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

CellMergeJudgement RuleBasedPredictor::predict_table_truncation(const TablePairCandidate& req, Issues&) {
    CellMergeJudgement out;
    if (req.upper_columns != req.lower_columns || req.upper_columns == 0) return out;
    const bool header_repeat = !req.lower_rows.empty() && req.lower_rows.front() == req.upper_header;
    if (!header_repeat && !req.continuation_marker && req.lower_caption.has_value()) return out;

    out.columns.assign(req.upper_columns, 0);
    const std::size_t lower_row = header_repeat ? 1 : 0;
    if (req.upper_rows.empty() || req.lower_rows.size() <= lower_row) return out;
    const auto& up = req.upper_rows.back();
    const auto& lo = req.lower_rows[lower_row];
    for (std::size_t j = 0; j < out.columns.size() && j < up.size() && j < lo.size(); ++j) {
        const auto u = text::trim(up[j]);
        const auto l = text::trim(lo[j]);
        if (u.empty() || l.empty()) continue;
        const bool split_word = text::codepoint_count(u) > 1 && text::last_codepoint(u) == U'-';
        const bool unfinished = !rules_.ends_clean(u) && text::is_ascii_lower(text::first_codepoint(l));
        if (split_word || unfinished) out.columns[j] = 1;
    }
    return out;
}

// -- wire protocol ----------------------------------------------------------

namespace wire {

namespace {

Json block_json(std::size_t idx, ElementType t, std::string content, std::size_t page, const BBox& b) {
    Json j;
    j["idx"] = idx;
    j["type"] = std::string(to_string(t));
    j["content"] = std::move(content);
    j["page"] = page;
    j["bbox"] = to_json(b);
    return j;
}

Json envelope(const char* task, Json blocks) {
    Json j;
    j["task"] = task;
    j["blocks"] = std::move(blocks);
    return j;
}

[[noreturn]] void malformed(const std::string& task, const std::string& why) {
    throw Error("predictors.MalformedResponse", task + " response: " + why);
}

std::size_t require_idx(const Json& entry, const char* key, const char* task) {
    if (!entry.is_object() || !entry.contains(key)) malformed(task, std::string("entry lacks '") + key + "'");
    const auto& v = entry.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        malformed(task, std::string("'") + key + "' is not a non-negative integer");
    }
    return v.get<std::size_t>();
}

const Json& require_array(const Json& resp, const char* task) {
    if (!resp.is_array()) malformed(task, "expected a JSON array");
    return resp;
}

} // namespace

Json hierarchy_request(const TitleSequence& req) {
    Json blocks = Json::array();
    for (const auto& it : req.items) blocks.push_back(block_json(it.idx, it.etype, it.content, it.page, it.bbox));
    return envelope(kTitleHierarchy, std::move(blocks));
}

Json text_truncation_request(std::span<const TextPairCandidate> req) {
    struct Block {
        ElementType t = ElementType::text;
        std::optional<std::string> head, tail;
        std::size_t page = 0;
        BBox bbox;
    };
    std::map<std::size_t, Block> blocks;
    for (const auto& c : req) {
        auto& s = blocks[c.src_idx];
        s.tail = c.src_tail;
        s.page = c.src_page;
        s.bbox = c.src_bbox;
        auto& t = blocks[c.tgt_idx];
        t.head = c.tgt_head;
        t.page = c.tgt_page;
        t.bbox = c.tgt_bbox;
    }
    Json arr = Json::array();
    for (const auto& [idx, b] : blocks) {
        std::string content;
        if (b.head && b.tail) {
            content = *b.head + " ... " + *b.tail;
        } else {
            content = b.head ? *b.head : *b.tail;
        }
        arr.push_back(block_json(idx, b.t, std::move(content), b.page, b.bbox));
    }
    return envelope(kTextTruncation, std::move(arr));
}

Json association_request(const AssocCandidates& req) {
    Json blocks = Json::array();
    for (const auto& it : req.items) blocks.push_back(block_json(it.idx, it.etype, it.content, it.page, it.bbox));
    return envelope(kAssociation, std::move(blocks));
}

Json table_request(const TablePairCandidate& req) {
    Json b;
    b["upper_idx"] = req.upper_idx;
    b["lower_idx"] = req.lower_idx;
    b["upper_caption"] = req.upper_caption ? Json(*req.upper_caption) : Json(nullptr);
    b["upper_row"] = req.upper_rows_html;
    b["lower_caption"] = req.lower_caption ? Json(*req.lower_caption) : Json(nullptr);
    b["lower_row"] = req.lower_rows_html;
    return envelope(kTableTruncation, Json::array({std::move(b)}));
}

bool link_allowed(ElementType src, ElementType tgt) {
    if (is_visual(src)) return tgt == ElementType::title;
    if (auto target = annotation_target(src)) return tgt == *target;
    return false;
}

HierarchyPrediction parse_hierarchy_response(const Json& resp, const TitleSequence& req, Issues& issues) {
    const char* task = kTitleHierarchy;
    std::set<std::size_t> requested;
    for (const auto& it : req.items) requested.insert(it.idx);

    std::map<std::size_t, int> levels;
    for (const auto& entry : require_array(resp, task)) {
        const auto idx = require_idx(entry, "idx", task);
        if (!entry.contains("level") || !entry.at("level").is_number_integer()) {
            malformed(task, "entry for idx " + std::to_string(idx) + " has no integer level");
        }
        const auto level = entry.at("level").get<long long>();
        if (level != -1 && level < 1) malformed(task, "level " + std::to_string(level) + " out of range");
        if (!requested.count(idx)) {
            add_issue(issues, "predictors.UnknownIdx", "hierarchy response names idx not in the request", idx);
            continue;
        }
        if (!levels.emplace(idx, static_cast<int>(level)).second) {
            malformed(task, "duplicate idx " + std::to_string(idx));
        }
    }
    HierarchyPrediction out;
    for (const auto& it : req.items) {
        const auto found = levels.find(it.idx);
        if (found == levels.end()) malformed(task, "missing idx " + std::to_string(it.idx));
        out.items.emplace_back(it.idx, found->second);
    }
    return out;
}

PairPrediction parse_text_truncation_response(const Json& resp, std::span<const TextPairCandidate> req,
                                              Issues& issues) {
    const char* task = kTextTruncation;
    std::set<std::pair<std::size_t, std::size_t>> candidates;
    for (const auto& c : req) candidates.emplace(c.src_idx, c.tgt_idx);

    std::set<std::pair<std::size_t, std::size_t>> accepted;
    for (const auto& entry : require_array(resp, task)) {
        const std::pair p{require_idx(entry, "src", task), require_idx(entry, "tgt", task)};
        if (!candidates.count(p)) {
            add_issue(issues, "predictors.PairNotCandidate",
                      "pair (" + std::to_string(p.first) + ", " + std::to_string(p.second) +
                          ") is not a truncation candidate",
                      p.first);
            continue;
        }
        if (!accepted.insert(p).second) {
            add_issue(issues, "predictors.DuplicatePair",
                      "pair (" + std::to_string(p.first) + ", " + std::to_string(p.second) + ") repeated",
                      p.first);
        }
    }
    return PairPrediction{{accepted.begin(), accepted.end()}};
}

PairPrediction parse_association_response(const Json& resp, const AssocCandidates& req, Issues& issues) {
    const char* task = kAssociation;
    std::map<std::size_t, ElementType> types;
    for (const auto& it : req.items) types.emplace(it.idx, it.etype);

    std::map<std::size_t, std::size_t> target_of;
    for (const auto& entry : require_array(resp, task)) {
        const auto src = require_idx(entry, "src", task);
        const auto tgt = require_idx(entry, "tgt", task);
        const auto st = types.find(src);
        const auto tt = types.find(tgt);
        if (st == types.end() || tt == types.end()) {
            add_issue(issues, "predictors.UnknownIdx",
                      "link (" + std::to_string(src) + ", " + std::to_string(tgt) + ") names idx not in the request",
                      src);
            continue;
        }
        if (!link_allowed(st->second, tt->second)) {
            add_issue(issues, "predictors.TypeRuleViolation",
                      std::string(to_string(st->second)) + " " + std::to_string(src) + " cannot link to " +
                          std::string(to_string(tt->second)) + " " + std::to_string(tgt),
                      src);
            continue;
        }
        auto [it, inserted] = target_of.emplace(src, tgt);
        if (!inserted) {
            add_issue(issues, "predictors.DuplicatePair",
                      "src " + std::to_string(src) + " linked more than once; keeping " + std::to_string(it->second),
                      src);
        }
    }
    PairPrediction out;
    for (const auto& [src, tgt] : target_of) out.pairs.emplace_back(src, tgt);
    return out;
}

CellMergeJudgement parse_table_response(const Json& resp, const TablePairCandidate& req, Issues& issues) {
    const char* task = kTableTruncation;
    const auto& arr = require_array(resp, task);
    if (arr.empty()) return {};
    if (arr.size() > 1) {
        add_issue(issues, "predictors.DuplicatePair", "table response holds more than one object; using the first",
                  req.upper_idx);
    }
    const auto& obj = arr.front();
    if (!obj.is_object()) malformed(task, "expected an object with a judgement list");
    const Json* list = nullptr;
    if (obj.contains("judgement")) {
        list = &obj.at("judgement");
    } else if (obj.contains("judgment")) {
        list = &obj.at("judgment");
    }
    if (!list || !list->is_array()) malformed(task, "judgement list missing");

    CellMergeJudgement out;
    for (const auto& v : *list) {
        if (!v.is_number_integer() || (v.get<long long>() != 0 && v.get<long long>() != 1)) {
            malformed(task, "judgement entries must be 0 or 1");
        }
        out.columns.push_back(v.get<int>());
    }
    if (out.columns.size() != req.upper_columns || req.upper_columns != req.lower_columns) {
        add_issue(issues, "predictors.LengthMismatch",
                  "judgement of length " + std::to_string(out.columns.size()) + " for tables of " +
                      std::to_string(req.upper_columns) + " and " + std::to_string(req.lower_columns) +
                      " columns; treated as not the same table",
                  req.upper_idx);
        return {};
    }
    return out;
}

} // namespace wire

RemotePredictor::RemotePredictor(BackendConfig backend, const FilterConfig& cfg, int retries)
    : client_(std::move(backend)), fallback_(cfg), retries_(std::max(0, retries)) {}

template <class Result, class Parse, class Fallback>
Result RemotePredictor::call(const char* task, const Json& request, Parse&& parse, Fallback&& fallback,
                             Issues& issues) {
    std::string last_error;
    for (int attempt = 0; attempt <= retries_; ++attempt) {
        Issues local;
        try {
            Result r = parse(client_.post(request), local);
            issues.insert(issues.end(), local.begin(), local.end());
            return r;
        } catch (const Error& e) {
            last_error = e.code() + ": " + e.what();
            if (e.code() != "predictors.MalformedResponse") break;
        } catch (const Json::exception& e) {
            last_error = std::string("predictors.MalformedResponse: ") + e.what();
        }
    }
    add_issue(issues, "predictors.FallbackToRules",
              std::string(task) + " request to " + client_.url() + " degraded to rules (" + last_error + ")");
    return fallback();
}

HierarchyPrediction RemotePredictor::predict_title_hierarchy(const TitleSequence& req, Issues& issues) {
    return call<HierarchyPrediction>(
        wire::kTitleHierarchy, wire::hierarchy_request(req),
        [&](const Json& r, Issues& is) { return wire::parse_hierarchy_response(r, req, is); },
        [&] { return fallback_.predict_title_hierarchy(req, issues); }, issues);
}

PairPrediction RemotePredictor::predict_text_truncation(std::span<const TextPairCandidate> req, Issues& issues) {
    return call<PairPrediction>(
        wire::kTextTruncation, wire::text_truncation_request(req),
        [&](const Json& r, Issues& is) { return wire::parse_text_truncation_response(r, req, is); },
        [&] { return fallback_.predict_text_truncation(req, issues); }, issues);
}

PairPrediction RemotePredictor::predict_association(const AssocCandidates& req, Issues& issues) {
    return call<PairPrediction>(
        wire::kAssociation, wire::association_request(req),
        [&](const Json& r, Issues& is) { return wire::parse_association_response(r, req, is); },
        [&] { return fallback_.predict_association(req, issues); }, issues);
}

CellMergeJudgement RemotePredictor::predict_table_truncation(const TablePairCandidate& req, Issues& issues) {
    return call<CellMergeJudgement>(
        wire::kTableTruncation, wire::table_request(req),
        [&](const Json& r, Issues& is) { return wire::parse_table_response(r, req, is); },
        [&] { return fallback_.predict_table_truncation(req, issues); }, issues);
}

} // namespace docstruct
