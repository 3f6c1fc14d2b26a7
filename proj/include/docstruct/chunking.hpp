#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "docstruct/error.hpp"
#include "docstruct/json_fwd.hpp"
#include "docstruct/types.hpp"

namespace docstruct {

struct ChunkPlanConfig {
    std::size_t stride = 8;
    std::size_t threshold = 2;
    /// Element types whose per-page density picks boundaries.
    std::vector<ElementType> task_types{ElementType::title};
};

/// Throws chunking.BadConfig unless stride >= 1 and threshold < stride.
void validate(const ChunkPlanConfig& cfg);

struct PageProfile {
    std::vector<std::size_t> counts; // one entry per page
};

PageProfile page_profile(const CanonicalDocument& doc, std::span<const ElementType> task_types);

struct PageRange {
    std::size_t start = 0; // inclusive
    std::size_t end = 0;   // inclusive

    bool contains(std::size_t page) const { return page >= start && page <= end; }
    bool operator==(const PageRange&) const = default;
};

struct ChunkPlan {
    std::vector<std::size_t> boundaries;
    std::vector<PageRange> chunks;

    /// Pages shared by chunk i and chunk i + 1.
    std::size_t overlap_width(std::size_t i) const;
};

/// b0 = 0; each next boundary is the page of maximal count inside
/// [b + s - t, b + s + t] clipped to the document (smallest page on ties).
/// Generation stops once the window start passes the last page.
std::vector<std::size_t> compute_boundaries(const PageProfile& profile, const ChunkPlanConfig& cfg);

/// chunk_i = (max(0, b_i - 1), min(b_{i+1} + 1, p_max)); the last chunk
/// runs to p_max.
std::vector<PageRange> build_chunks(std::span<const std::size_t> boundaries, std::size_t p_max);

ChunkPlan plan_chunks(const PageProfile& profile, const ChunkPlanConfig& cfg);

/// One chunk covering every page.
ChunkPlan single_chunk_plan(std::size_t page_count);

Json to_json(const ChunkPlan& plan);

// -- synchronization -------------------------------------------------------

/// Title levels predicted for one chunk, in reading order. Level -1 marks a
/// block the predictor judged not to be a title.
struct ChunkLevels {
    std::size_t chunk_index = 0;
    std::vector<std::pair<std::size_t, int>> levels; // (idx, level)
};

struct SyncStep {
    std::size_t chunk_index = 0;
    int deviation = 0;
    std::size_t overlap_titles = 0;
    bool empty_overlap = false;
};

struct SyncResult {
    std::map<std::size_t, int> levels; // idx -> final level
    std::vector<SyncStep> steps;
    Issues issues;
};

/// Rounds half away from zero.
int round_deviation(double avg);

/// Calibrates chunk levels onto the first chunk's scale. Input may arrive in
/// any order; it is processed by chunk_index.
SyncResult synchronize_hierarchy(std::vector<ChunkLevels> chunk_preds);

// -- union of pair predictions -------------------------------------------

enum class PairKind { text_truncation, association };

struct ChunkPairs {
    std::size_t chunk_index = 0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (src, tgt)
};

struct PairUnion {
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // sorted, unique
    Issues issues;
};

/// Set union keyed by (src, tgt). For association a src keeps the target
/// from the earliest chunk; later conflicting targets are flagged.
PairUnion merge_union(std::vector<ChunkPairs> chunk_preds, PairKind kind);

struct ChunkJudgements {
    std::size_t chunk_index = 0;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<int>> judgements;
};

struct JudgementUnion {
    std::map<std::pair<std::size_t, std::size_t>, std::vector<int>> judgements;
    Issues issues;
};

/// Union of table judgements keyed by (upper, lower); earliest chunk wins.
JudgementUnion merge_union(std::vector<ChunkJudgements> chunk_preds);

} // namespace docstruct
