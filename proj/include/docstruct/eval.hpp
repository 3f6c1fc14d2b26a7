#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "docstruct/error.hpp"
#include "docstruct/json_fwd.hpp"
#include "docstruct/predictors.hpp"
#include "docstruct/types.hpp"

namespace docstruct {

struct LabeledTree {
    std::string label;
    std::vector<LabeledTree> children;

    std::size_t size() const;
    bool operator==(const LabeledTree&) const = default;
};

/// Postorder arrays for the Zhang-Shasha recurrence; build once per tree
/// when comparing one tree against many.
struct PreparedTree {
    std::vector<std::string> labels;   // postorder
    std::vector<std::size_t> leftmost; // leftmost leaf descendant, postorder index
    std::vector<std::size_t> keyroots; // ascending
};

PreparedTree prepare(const LabeledTree& t);

/// Ordered tree edit distance with unit insert/delete/relabel costs.
std::size_t tree_edit_distance(const PreparedTree& a, const PreparedTree& b);
std::size_t tree_edit_distance(const LabeledTree& a, const LabeledTree& b);

/// 1 - distance / max(|a|, |b|).
double teds(const LabeledTree& a, const LabeledTree& b);

std::string normalize_label(std::string_view title);

/// Title tree with an empty-labelled root; each title parents to the nearest
/// preceding title of smaller level. Titles with level < 1 are skipped.
LabeledTree hierarchy_tree(std::span<const std::pair<std::string, int>> titles);

struct PRF {
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
    /// Precision of an empty prediction set is reported as 1.0 and flagged.
    bool vacuous_precision = false;
    std::size_t true_positives = 0;
    std::size_t predicted = 0;
    std::size_t gold = 0;
};

using IdxPair = std::pair<std::size_t, std::size_t>;

PRF prf_from_counts(std::size_t tp, std::size_t predicted, std::size_t gold);
/// Inputs are treated as sets.
PRF pair_prf(std::span<const IdxPair> pred, std::span<const IdxPair> gold);

/// Judgement units: one continuation unit per candidate (empty vs non-empty
/// agree) plus one unit per column when both vectors are non-empty. Vectors
/// of different lengths count max(len) column units, all wrong.
struct MergeAccuracy {
    std::size_t units_correct = 0;
    std::size_t units_total = 0;
    std::size_t columns_correct = 0;
    std::size_t columns_total = 0;
    std::size_t pairs_correct = 0;
    std::size_t pairs_total = 0;
    std::size_t vectors_correct = 0;
    std::size_t vectors_total = 0;
    std::size_t length_mismatches = 0;

    std::optional<double> per_unit() const;
    std::optional<double> per_column() const;
    std::optional<double> per_pair() const;
    std::optional<double> per_vector() const;
    MergeAccuracy& operator+=(const MergeAccuracy& o);
};

/// Throws eval.LengthMismatch when the lists are not aligned.
MergeAccuracy merge_accuracy(std::span<const CellMergeJudgement> preds, std::span<const CellMergeJudgement> golds);

/// Exact area of a union of rectangles.
double union_area(std::span<const BBox> boxes);

struct BBoxScores {
    std::optional<double> recall; // nullopt when the gold area is empty
    std::optional<double> iou;    // nullopt when both unions are empty
    double intersection_area = 0;
    double gold_area = 0;
    double union_area = 0;
};

/// Overlap of the retrieved union with the gold union, per page, summed
/// over pages.
BBoxScores bbox_scores(std::span<const PageBox> retrieved, std::span<const PageBox> gold);

// -- annotation files -------------------------------------------------------

struct HierarchyEntry {
    std::size_t idx = 0;
    int level = 1;
    std::string content;
};

struct TableEntry {
    std::size_t upper = 0;
    std::size_t lower = 0;
    std::vector<int> judgement;
};

struct EvidenceEntry {
    std::string query;
    std::vector<PageBox> boxes;
};

/// One structural annotation per document. Prediction artifacts use the
/// same layout, so gold and predicted files load through the same code.
struct GoldAnnotations {
    int version = 1;
    std::string doc_id;
    std::vector<HierarchyEntry> hierarchy;
    std::vector<IdxPair> text_truncation;
    std::vector<IdxPair> association;
    std::vector<TableEntry> table_truncation;
    std::vector<EvidenceEntry> evidence;
};

inline constexpr int kAnnotationVersion = 1;

/// Throws eval.SchemaMismatch on unknown keys, wrong types or versions.
GoldAnnotations annotations_from_json(const Json& j);
Json to_json(const GoldAnnotations& g);

/// Checks that every referenced idx exists in the document.
Issues validate_annotations(const GoldAnnotations& g, const CanonicalDocument& doc);

struct DocScores {
    std::string doc_id;
    std::optional<double> teds;
    PRF text_truncation;
    PRF association;
    MergeAccuracy table_merge;
    std::optional<BBoxScores> evidence;
};

DocScores score_document(const GoldAnnotations& pred, const GoldAnnotations& gold);

struct EvalReport {
    std::vector<DocScores> documents;
    std::optional<double> mean_teds;
    PRF text_truncation; // micro-averaged
    PRF association;     // micro-averaged
    MergeAccuracy table_merge;
    std::optional<BBoxScores> evidence;
};

EvalReport evaluate(std::span<const std::pair<GoldAnnotations, GoldAnnotations>> pred_gold);
Json to_json(const EvalReport& r);
std::string to_table(const EvalReport& r);

} // namespace docstruct
