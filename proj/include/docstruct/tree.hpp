#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "docstruct/apply.hpp"
#include "docstruct/error.hpp"
#include "docstruct/filtering.hpp"
#include "docstruct/http_client.hpp"
#include "docstruct/json_fwd.hpp"
#include "docstruct/types.hpp"

namespace docstruct {

enum class NodeKind { root, section, subnode, visual };
std::string_view to_string(NodeKind k);
std::optional<NodeKind> node_kind_from_string(std::string_view s);

struct DocNode {
    std::size_t node_id = 0;
    NodeKind kind = NodeKind::root;
    std::optional<std::string> title_text;
    int level = 0;
    /// Reading order. Sections start with their title element; visual nodes
    /// hold the visual and its captions and footnotes.
    std::vector<CanonicalElement> body;
    std::optional<std::string> summary;
    std::vector<std::string> title_path;
    std::vector<DocNode> children;
    std::vector<PageBox> bboxes;

    bool operator==(const DocNode&) const = default;
};

struct DocTree {
    std::string doc_id;
    DocNode root;
    /// Boxes of elements absorbed by text/table merges, keyed by the
    /// surviving idx. Node bboxes include them.
    std::map<std::size_t, std::vector<PageBox>> merged_extents;

    bool operator==(const DocTree&) const = default;
};

struct TreeResult {
    DocTree tree;
    Issues issues;
};

TreeResult build_tree(const ResolvedDocument& rd);

/// Paragraph grouping used by chunk_nodes. join_after[i] marks the boundary
/// between paragraph i and i + 1 as a truncation join. A group closes at the
/// first non-join boundary once its running length reaches threshold.
/// Returns the exclusive end index of every group.
std::vector<std::size_t> plan_subnodes(std::span<const std::size_t> lengths, const std::vector<bool>& join_after,
                                       std::size_t threshold);

/// Splits long sections into subnodes. `joins` lists (idx, next idx)
/// paragraph boundaries that must not be split.
DocTree chunk_nodes(DocTree tree, std::size_t threshold,
                    const std::set<std::pair<std::size_t, std::size_t>>& joins = {});

/// Text-merge boundaries recorded in a merge log, as (idx, next idx) pairs.
std::set<std::pair<std::size_t, std::size_t>> join_boundaries(const ResolvedDocument& rd);

/// Renumbers node_id in preorder, starting at 0 for the root.
void renumber(DocTree& tree);

/// Recomputes every node's bboxes from its body and merged_extents.
void refresh_bboxes(DocTree& tree);

/// Paragraph texts a summary is written from.
std::vector<std::string> summary_paragraphs(const DocNode& node);

struct SummaryRequest {
    std::size_t node_id = 0;
    std::vector<std::string> title_path;
    std::vector<std::string> paragraphs;
};

class Summarizer {
public:
    virtual ~Summarizer() = default;
    virtual std::string summarize(const SummaryRequest& req, Issues& issues) = 0;
    virtual std::size_t char_cap() const = 0;
};

/// Lead sentences up to max_sentences, cut to char_cap code points; an empty
/// node falls back to its own title.
class ExtractiveSummarizer : public Summarizer {
public:
    explicit ExtractiveSummarizer(std::size_t max_sentences = 2, std::size_t char_cap = 400,
                                  const FilterConfig& cfg = {});
    std::string summarize(const SummaryRequest& req, Issues& issues) override;
    std::size_t char_cap() const override { return cap_; }

private:
    std::size_t max_sentences_;
    std::size_t cap_;
    TextRules rules_;
};

/// POSTs {node_id, title_path, paragraphs} and expects {summary}. Falls back
/// to the extractive summarizer with tree.SummaryFallback.
class RemoteSummarizer : public Summarizer {
public:
    RemoteSummarizer(BackendConfig backend, ExtractiveSummarizer fallback, int retries = 1);
    std::string summarize(const SummaryRequest& req, Issues& issues) override;
    std::size_t char_cap() const override { return fallback_.char_cap(); }

private:
    JsonHttpClient client_;
    ExtractiveSummarizer fallback_;
    int retries_;
};

/// Fills every node's summary; up to `jobs` requests run at once.
Issues summarize_nodes(DocTree& tree, Summarizer& sz, std::size_t jobs = 1);

Json tree_to_json(const DocTree& tree);
/// Throws tree.MalformedTree on a document that is not a tree export.
DocTree tree_from_json(const Json& j);

std::string export_markdown(const DocTree& tree);

/// Depth-first preorder visit.
template <class F>
void for_each_node(const DocNode& n, F&& f) {
    f(n);
    for (const auto& c : n.children) for_each_node(c, f);
}

} // namespace docstruct
