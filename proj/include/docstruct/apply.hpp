#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "docstruct/error.hpp"
#include "docstruct/filtering.hpp"
#include "docstruct/html_table.hpp"
#include "docstruct/json_fwd.hpp"
#include "docstruct/predictors.hpp"
#include "docstruct/types.hpp"

namespace docstruct {

struct FusedCell {
    std::string upper;
    std::string lower;
    std::string joined;

    bool operator==(const FusedCell&) const = default;
};

struct MergeRecord {
    enum class Kind { text, table };

    Kind kind = Kind::text;
    std::size_t target_idx = 0;            // surviving element
    std::vector<std::size_t> absorbed;     // removed elements, in order
    std::vector<PageBox> absorbed_bboxes;
    std::vector<int> judgement;            // table merges only
    bool header_dropped = false;
    std::vector<FusedCell> fused_cells;
    std::vector<std::string> skipped;      // columns left unfused, with reason
};

std::string_view to_string(MergeRecord::Kind k);

struct ResolvedDocument {
    CanonicalDocument doc;
    std::map<std::size_t, int> levels;                 // title idx -> level
    std::map<std::size_t, std::size_t> caption_links;  // caption/footnote -> visual
    std::map<std::size_t, std::size_t> section_links;  // visual -> title
    std::vector<MergeRecord> merge_log;
    std::map<std::size_t, std::size_t> alias;          // absorbed idx -> surviving idx
    std::vector<std::size_t> demoted;                  // titles re-typed as text
    Issues issues;

    /// Follows the alias chain of an absorbed idx to the surviving element.
    std::size_t resolve(std::size_t idx) const;
};

ResolvedDocument resolve_start(CanonicalDocument doc);

/// Collapses predicted pairs (and chains of them) into single elements.
/// When `candidates` is given, pairs outside it are skipped with
/// apply.PairNotAdjacent.
void merge_text(ResolvedDocument& rd, const PairPrediction& pairs,
                std::optional<std::span<const TextPairCandidate>> candidates = std::nullopt);

struct TableMergeOutcome {
    TableGrid grid;
    bool header_dropped = false;
    std::vector<FusedCell> fused_cells;
    std::vector<std::string> skipped;
};

/// Stacks lower under upper, dropping a repeated header row, and fuses the
/// boundary cells of every column with q = 1. A fully fused boundary
/// collapses into one row. Throws apply.ColumnMismatch when widths differ
/// or the judgement length does not match.
TableMergeOutcome merge_table_grids(const TableGrid& upper, const TableGrid& lower, std::span<const int> judgement);

/// Applies one table judgement; an empty judgement is a no-op. Failures are
/// recorded in rd.issues and leave the document unchanged.
void merge_tables(ResolvedDocument& rd, const TablePairCandidate& candidate, const CellMergeJudgement& judgement);

void assign_levels(ResolvedDocument& rd, const HierarchyPrediction& levels);

void attach_links(ResolvedDocument& rd, const PairPrediction& assoc);

Json to_json(const MergeRecord& r);
Json merge_log_json(const ResolvedDocument& rd);
Json to_json(const Issues& issues);

} // namespace docstruct
