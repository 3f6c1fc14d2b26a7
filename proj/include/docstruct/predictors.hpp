#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "docstruct/error.hpp"
#include "docstruct/filtering.hpp"
#include "docstruct/http_client.hpp"
#include "docstruct/json_fwd.hpp"

namespace docstruct {

struct HierarchyPrediction {
    std::vector<std::pair<std::size_t, int>> items; // (idx, level); -1 = not a title
};

struct PairPrediction {
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (src, tgt)
};

/// Empty columns means "not the same table".
struct CellMergeJudgement {
    std::vector<int> columns;

    bool continuation() const { return !columns.empty(); }
    bool operator==(const CellMergeJudgement&) const = default;
};

/// Uniform interface over the four structural subtasks. Implementations
/// must be safe to call concurrently; per-call findings go to `issues`.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual HierarchyPrediction predict_title_hierarchy(const TitleSequence& req, Issues& issues) = 0;
    virtual PairPrediction predict_text_truncation(std::span<const TextPairCandidate> req, Issues& issues) = 0;
    virtual PairPrediction predict_association(const AssocCandidates& req, Issues& issues) = 0;
    virtual CellMergeJudgement predict_table_truncation(const TablePairCandidate& req, Issues& issues) = 0;
};

/// Numbering shape of a title ("dec:2", "paren_num", "cn_chapter", "plain", ...).
std::string title_shape(std::string_view title);

/// Deterministic baseline needing no model:
///  - hierarchy: numbering shapes are assigned levels by a shape stack
///    (a shape seen before returns to its level; a new shape nests one
///    deeper); titles longer than max_title_chars, or empty, get -1
///  - text truncation: src tail has no terminator, tgt head has no list
///    prefix, and tgt opens lowercase, or the tail is hyphenated, or the
///    seam is CJK on both sides
///  - association: captions/footnotes go to the nearest visual of their
///    kind on the same page (then adjacent pages); visuals go to the most
///    recent preceding title
///  - table truncation: equal column counts and (repeated header, marker or
///    no lower caption) mean continuation; a column fuses when its upper
///    boundary cell ends with '-' or is unfinished and the lower cell opens
///    lowercase
class RuleBasedPredictor : public Predictor {
public:
    explicit RuleBasedPredictor(const FilterConfig& cfg = {}, std::size_t max_title_chars = 150);

    HierarchyPrediction predict_title_hierarchy(const TitleSequence& req, Issues& issues) override;
    PairPrediction predict_text_truncation(std::span<const TextPairCandidate> req, Issues& issues) override;
    PairPrediction predict_association(const AssocCandidates& req, Issues& issues) override;
    CellMergeJudgement predict_table_truncation(const TablePairCandidate& req, Issues& issues) override;

private:
    TextRules rules_;
    std::size_t max_title_chars_;
};

// -- wire protocol ----------------------------------------------------------

namespace wire {

inline constexpr const char* kTitleHierarchy = "title_hierarchy";
inline constexpr const char* kTextTruncation = "text_truncation";
inline constexpr const char* kAssociation = "association";
inline constexpr const char* kTableTruncation = "table_truncation";

Json hierarchy_request(const TitleSequence& req);
Json text_truncation_request(std::span<const TextPairCandidate> req);
Json association_request(const AssocCandidates& req);
Json table_request(const TablePairCandidate& req);

/// Each parser throws predictors.MalformedResponse when the response cannot
/// be used at all, and records dropped entries in `issues` otherwise.
HierarchyPrediction parse_hierarchy_response(const Json& resp, const TitleSequence& req, Issues& issues);
PairPrediction parse_text_truncation_response(const Json& resp, std::span<const TextPairCandidate> req,
                                              Issues& issues);
PairPrediction parse_association_response(const Json& resp, const AssocCandidates& req, Issues& issues);
CellMergeJudgement parse_table_response(const Json& resp, const TablePairCandidate& req, Issues& issues);

/// True when a (src type, tgt type) link obeys the association rules.
bool link_allowed(ElementType src, ElementType tgt);

} // namespace wire

/// Sends each request to a JSON-over-HTTP backend. Malformed responses are
/// retried `retries` times; after that, or on an unreachable backend, the
/// call degrades to the rule baseline with a predictors.FallbackToRules
/// warning.
class RemotePredictor : public Predictor {
public:
    RemotePredictor(BackendConfig backend, const FilterConfig& cfg = {}, int retries = 1);

    HierarchyPrediction predict_title_hierarchy(const TitleSequence& req, Issues& issues) override;
    PairPrediction predict_text_truncation(std::span<const TextPairCandidate> req, Issues& issues) override;
    PairPrediction predict_association(const AssocCandidates& req, Issues& issues) override;
    CellMergeJudgement predict_table_truncation(const TablePairCandidate& req, Issues& issues) override;

private:
    template <class Result, class Parse, class Fallback>
    Result call(const char* task, const Json& request, Parse&& parse, Fallback&& fallback, Issues& issues);

    JsonHttpClient client_;
    RuleBasedPredictor fallback_;
    int retries_;
};

} // namespace docstruct
