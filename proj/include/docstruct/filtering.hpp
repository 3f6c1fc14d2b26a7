#pragma once

#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "docstruct/error.hpp"
#include "docstruct/json_fwd.hpp"
#include "docstruct/types.hpp"

namespace docstruct {

struct FilterConfig {
    /// Sentence terminators; a block "ends clean" when its trimmed text ends
    /// with one of these, optionally followed by closers.
    std::vector<std::string> terminators{".", "!", "?", "。", "！", "？", ":", "；", ";"};
    /// Closing quotes/brackets allowed directly after a terminator.
    std::vector<std::string> closers{"\"", "'", ")", "]", "”", "’", "」", "』", "）", "】", "》"};
    /// ECMAScript patterns matched at the start of the trimmed block text.
    std::vector<std::string> prefix_patterns{
        R"(^\d+\.(\d+\.?)*)",                                  // 1.  1.1  1.1.2
        R"(^\(\s*[A-Za-z0-9]{1,4}\s*\))",                      // (a)  (1)  (iv)
        R"(^[A-Za-z0-9]\))",                                   // a)  1)
        R"(^[ivxlcdmIVXLCDM]{1,6}\.\s)",                       // i.  IV.
        R"(^[A-Z]\.\s)",                                       // A.
        R"(^(•|·|▪|◦|●|○|■|□|–|—|-|\*)\s*)",                  // bullets and dashes
        R"(^（(\d+|一|二|三|四|五|六|七|八|九|十)+）)",           // （1） （一）
        R"(^第(\d|一|二|三|四|五|六|七|八|九|十|百)+(章|节|条|部分))", // 第一章
        R"(^(一|二|三|四|五|六|七|八|九|十)+、)",                // 一、
    };
    /// Treat an ASCII uppercase first letter as a sentence opener.
    bool uppercase_opener = true;
    /// Cap, in code points, for extracted head/tail sentences.
    std::size_t sentence_char_cap = 200;

    double width_band_low = 0.9;
    double width_band_high = 1.1;
    std::vector<std::string> continuation_markers{"continued", "cont'd", "（续）", "续表"};
    std::size_t row_window = 3;
};

/// Throws cli.ConfigInvalid on unknown keys or out-of-range values.
FilterConfig filter_config_from_json(const Json& j);
Json to_json(const FilterConfig& cfg);

/// Compiled form of the configured rules.
class TextRules {
public:
    explicit TextRules(const FilterConfig& cfg);

    /// Trimmed text ends with a terminator (optionally followed by closers).
    bool ends_clean(std::string_view text) const;
    /// Trimmed text starts with a configured list/number prefix.
    bool has_prefix(std::string_view text) const;
    /// First code point is an uppercase sentence opener (when enabled).
    bool opens_sentence(std::string_view text) const;

    /// Splits at terminators followed by whitespace or end of text (CJK
    /// terminators split unconditionally). Sentences are trimmed.
    std::vector<std::string> sentences(std::string_view text) const;
    std::string first_sentence(std::string_view text) const;
    std::string last_sentence(std::string_view text) const;

    const FilterConfig& config() const { return cfg_; }

private:
    FilterConfig cfg_;
    std::vector<std::regex> prefixes_;
};

struct FilteredItem {
    std::size_t idx = 0;
    ElementType etype = ElementType::other;
    std::string content;
    std::size_t page = 0;
    BBox bbox;

    bool operator==(const FilteredItem&) const = default;
};

struct TitleSequence {
    std::vector<FilteredItem> items;
};

struct AssocCandidates {
    std::vector<FilteredItem> items;
};

enum class BoundaryKind { page_break, column_break, interleaved_block, same_flow };
std::string_view to_string(BoundaryKind k);

struct TextPairCandidate {
    std::size_t src_idx = 0;
    std::size_t tgt_idx = 0;
    std::string src_tail;
    std::string tgt_head;
    BoundaryKind boundary_kind = BoundaryKind::same_flow;
    std::size_t src_page = 0;
    std::size_t tgt_page = 0;
    BBox src_bbox;
    BBox tgt_bbox;
};

struct TablePairCandidate {
    std::size_t upper_idx = 0;
    std::size_t lower_idx = 0;
    std::size_t upper_page = 0;
    std::size_t lower_page = 0;
    std::optional<std::string> upper_caption;
    std::optional<std::string> lower_caption;
    /// Last row_window rows of the upper table / first rows of the lower
    /// table, as <tr> HTML fragments.
    std::string upper_rows_html;
    std::string lower_rows_html;
    /// Same rows in expanded text form (one entry per column).
    std::vector<std::vector<std::string>> upper_rows;
    std::vector<std::vector<std::string>> lower_rows;
    /// First row of the upper table, for repeated-header detection.
    std::vector<std::string> upper_header;
    double width_ratio = 0;
    std::size_t upper_columns = 0;
    std::size_t lower_columns = 0;
    bool continuation_marker = false;
};

struct TableFilterResult {
    std::vector<TablePairCandidate> candidates;
    Issues issues;
};

TitleSequence filter_titles(const CanonicalDocument& doc);
AssocCandidates filter_association_candidates(const CanonicalDocument& doc);
std::vector<TextPairCandidate> filter_text_truncation_candidates(const CanonicalDocument& doc,
                                                                 const TextRules& rules);
TableFilterResult filter_table_truncation_candidates(const CanonicalDocument& doc,
                                                     const FilterConfig& cfg);

/// Adjacent text pairs in reading order (no text element in between), the
/// set the truncation filter selects from.
std::vector<std::pair<std::size_t, std::size_t>> adjacent_text_pairs(const CanonicalDocument& doc);

/// The table_caption attached to a table by position: the nearest caption
/// directly before it (skipping page headers/footers), else directly after.
const CanonicalElement* table_caption_of(const CanonicalDocument& doc, std::size_t table_idx);

bool has_continuation_marker(std::string_view caption, const std::vector<std::string>& markers);

} // namespace docstruct
