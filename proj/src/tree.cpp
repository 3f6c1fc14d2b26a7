#include "docstruct/tree.hpp"

#include <algorithm>
#include <map>

#include "docstruct/ingest.hpp"
#include "docstruct/parallel.hpp"
#include "docstruct/text_util.hpp"

namespace docstruct {

std::string_view to_string(NodeKind k) {
    switch (k) {
    case NodeKind::root: return "root";
    case NodeKind::section: return "section";
    case NodeKind::subnode: return "subnode";
    case NodeKind::visual: return "visual";
    }
    return "root";
}

std::optional<NodeKind> node_kind_from_string(std::string_view s) {
    for (auto k : {NodeKind::root, NodeKind::section, NodeKind::subnode, NodeKind::visual}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

namespace {

struct ArenaNode {
    DocNode node;
    std::vector<std::size_t> kids;
};

std::size_t anchor_of(const DocNode& n) {
    return n.body.empty() ? 0 : n.body.front().idx;
}

void sort_body(std::vector<CanonicalElement>& body) {
    std::stable_sort(body.begin(), body.end(),
                     [](const CanonicalElement& a, const CanonicalElement& b) { return a.idx < b.idx; });
}

DocNode assemble(std::vector<ArenaNode>& arena, std::size_t i) {
    DocNode n = std::move(arena[i].node);
    sort_body(n.body);
    for (auto k : arena[i].kids) n.children.push_back(assemble(arena, k));
    std::stable_sort(n.children.begin(), n.children.end(),
                     [](const DocNode& a, const DocNode& b) { return anchor_of(a) < anchor_of(b); });
    return n;
}

void renumber_from(DocNode& n, std::size_t& next) {
    n.node_id = next++;
    for (auto& c : n.children) renumber_from(c, next);
}

void refresh_from(DocNode& n, const std::map<std::size_t, std::vector<PageBox>>& extents) {
    n.bboxes.clear();
    for (const auto& e : n.body) {
        n.bboxes.push_back({e.page, e.bbox});
        if (auto it = extents.find(e.idx); it != extents.end()) {
            n.bboxes.insert(n.bboxes.end(), it->second.begin(), it->second.end());
        }
    }
    for (auto& c : n.children) refresh_from(c, extents);
}

} // namespace

void renumber(DocTree& tree) {
    std::size_t next = 0;
    renumber_from(tree.root, next);
}

void refresh_bboxes(DocTree& tree) { refresh_from(tree.root, tree.merged_extents); }

TreeResult build_tree(const ResolvedDocument& rd) {
    TreeResult out;
    auto& issues = out.issues;
    const auto& doc = rd.doc;

    std::vector<ArenaNode> arena(1);
    arena[0].node.kind = NodeKind::root;
    arena[0].node.level = 0;

    auto add_child = [&](std::size_t parent, DocNode n) {
        arena.push_back(ArenaNode{std::move(n), {}});
        arena[parent].kids.push_back(arena.size() - 1);
        return arena.size() - 1;
    };

    std::map<std::size_t, std::size_t> title_node;  // title idx -> arena index
    std::map<std::size_t, std::size_t> open_at;     // visual/annotation idx -> section open at that point
    std::map<std::size_t, std::vector<const CanonicalElement*>> annotations_of;
    std::vector<std::size_t> stack;

    for (const auto& e : doc.elements) {
        const std::size_t current = stack.empty() ? 0 : stack.back();
        if (e.etype == ElementType::title) {
            const auto lv = rd.levels.find(e.idx);
            const int level = lv == rd.levels.end() ? 1 : lv->second;
            while (!stack.empty() && arena[stack.back()].node.level >= level) stack.pop_back();
            const std::size_t parent = stack.empty() ? 0 : stack.back();
            DocNode n;
            n.kind = NodeKind::section;
            n.title_text = e.content;
            n.level = level;
            n.body.push_back(e);
            n.title_path = arena[parent].node.title_path;
            n.title_path.push_back(e.content);
            const auto id = add_child(parent, std::move(n));
            title_node[e.idx] = id;
            stack.push_back(id);
        } else if (is_independent(e.etype)) {
            arena[0].node.body.push_back(e);
        } else if (is_visual(e.etype)) {
            open_at[e.idx] = current;
        } else if (is_visual_annotation(e.etype)) {
            const auto link = rd.caption_links.find(e.idx);
            const auto* visual = link == rd.caption_links.end() ? nullptr : doc.find(link->second);
            if (visual && is_visual(visual->etype)) {
                annotations_of[visual->idx].push_back(&e);
            } else {
                arena[current].node.body.push_back(e);
            }
        } else {
            arena[current].node.body.push_back(e);
        }
    }

    for (const auto& e : doc.elements) {
        if (!is_visual(e.etype)) continue;
        std::size_t parent = open_at.at(e.idx);
        const auto link = rd.section_links.find(e.idx);
        const auto section = link == rd.section_links.end() ? title_node.end() : title_node.find(link->second);
        if (section != title_node.end()) {
            parent = section->second;
        } else {
            add_issue(issues, "tree.VisualFallback", "visual attached to the section open at its position", e.idx);
        }
        DocNode n;
        n.kind = NodeKind::visual;
        n.level = arena[parent].node.level;
        n.title_path = arena[parent].node.title_path;
        n.body.push_back(e);
        for (const auto* a : annotations_of[e.idx]) n.body.push_back(*a);
        add_child(parent, std::move(n));
    }

    out.tree.doc_id = doc.doc_id;
    out.tree.root = assemble(arena, 0);
    for (const auto& rec : rd.merge_log) {
        auto& boxes = out.tree.merged_extents[rec.target_idx];
        boxes.insert(boxes.end(), rec.absorbed_bboxes.begin(), rec.absorbed_bboxes.end());
    }
    renumber(out.tree);
    refresh_bboxes(out.tree);
    return out;
}

std::vector<std::size_t> plan_subnodes(std::span<const std::size_t> lengths, const std::vector<bool>& join_after,
                                       std::size_t threshold) {
    std::vector<std::size_t> ends;
    std::size_t sum = 0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        sum += lengths[i];
        const bool last = i + 1 == lengths.size();
        const bool join = i < join_after.size() && join_after[i];
        if (last || (sum >= threshold && !join)) {
            ends.push_back(i + 1);
            sum = 0;
        }
    }
    return ends;
}

namespace {

void chunk_node(DocNode& n, std::size_t threshold, const std::set<std::pair<std::size_t, std::size_t>>& joins) {
    for (auto& c : n.children) chunk_node(c, threshold, joins);
    if (n.kind != NodeKind::section || n.body.size() < 3) return;

    std::vector<CanonicalElement> paragraphs(n.body.begin() + 1, n.body.end());
    std::vector<std::size_t> lengths;
    std::vector<bool> join_after;
    for (std::size_t i = 0; i < paragraphs.size(); ++i) {
        lengths.push_back(text::codepoint_count(paragraphs[i].content));
        if (i + 1 < paragraphs.size()) join_after.push_back(joins.count({paragraphs[i].idx, paragraphs[i + 1].idx}) > 0);
    }
    const auto ends = plan_subnodes(lengths, join_after, threshold);
    if (ends.size() <= 1) return;

    n.body.resize(1);
    std::size_t begin = 0;
    for (const auto end : ends) {
        DocNode sub;
        sub.kind = NodeKind::subnode;
        sub.level = n.level;
        sub.title_path = n.title_path;
        sub.body.assign(paragraphs.begin() + static_cast<std::ptrdiff_t>(begin),
                        paragraphs.begin() + static_cast<std::ptrdiff_t>(end));
        n.children.push_back(std::move(sub));
        begin = end;
    }
    std::stable_sort(n.children.begin(), n.children.end(),
                     [](const DocNode& a, const DocNode& b) { return anchor_of(a) < anchor_of(b); });
}

} // namespace

DocTree chunk_nodes(DocTree tree, std::size_t threshold, const std::set<std::pair<std::size_t, std::size_t>>& joins) {
    if (threshold == 0) throw Error("tree.BadThreshold", "node chunk threshold must be > 0");
    chunk_node(tree.root, threshold, joins);
    renumber(tree);
    refresh_bboxes(tree);
    return tree;
}

std::set<std::pair<std::size_t, std::size_t>> join_boundaries(const ResolvedDocument& rd) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (const auto& rec : rd.merge_log) {
        if (rec.kind != MergeRecord::Kind::text) continue;
        std::size_t prev = rec.target_idx;
        for (auto a : rec.absorbed) {
            out.emplace(prev, a);
            prev = a;
        }
    }
    return out;
}

std::vector<std::string> summary_paragraphs(const DocNode& node) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < node.body.size(); ++i) {
        const auto& e = node.body[i];
        if (node.kind == NodeKind::section && i == 0) continue;
        if (is_independent(e.etype) || is_visual(e.etype)) continue;
        const auto t = text::trim(e.content);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

ExtractiveSummarizer::ExtractiveSummarizer(std::size_t max_sentences, std::size_t char_cap, const FilterConfig& cfg)
    : max_sentences_(max_sentences), cap_(char_cap), rules_(cfg) {}

std::string ExtractiveSummarizer::summarize(const SummaryRequest& req, Issues&) {
    std::string out;
    std::size_t taken = 0;
    for (const auto& p : req.paragraphs) {
        for (const auto& s : rules_.sentences(p)) {
            if (taken == max_sentences_) break;
            if (s.empty()) continue;
            out = out.empty() ? s : out + " " + s;
            ++taken;
        }
        if (taken == max_sentences_) break;
    }
    if (out.empty() && !req.title_path.empty()) out = std::string(text::trim(req.title_path.back()));
    return text::take_front(out, cap_);
}

RemoteSummarizer::RemoteSummarizer(BackendConfig backend, ExtractiveSummarizer fallback, int retries)
    : client_(std::move(backend)), fallback_(std::move(fallback)), retries_(std::max(0, retries)) {}

std::string RemoteSummarizer::summarize(const SummaryRequest& req, Issues& issues) {
    Json body;
    body["node_id"] = req.node_id;
    body["title_path"] = req.title_path;
    body["paragraphs"] = req.paragraphs;
    std::string last_error;
    for (int attempt = 0; attempt <= retries_; ++attempt) {
        try {
            const Json resp = client_.post(body);
            if (!resp.is_object() || !resp.contains("summary") || !resp.at("summary").is_string()) {
                throw Error("predictors.MalformedResponse", "summary response lacks a 'summary' string");
            }
            auto summary = resp.at("summary").get<std::string>();
            if (text::codepoint_count(summary) > char_cap()) {
                add_issue(issues, "tree.SummaryTruncated",
                          "summary for node " + std::to_string(req.node_id) + " cut to the length cap");
                summary = text::take_front(summary, char_cap());
            }
            return summary;
        } catch (const Error& e) {
            last_error = e.code() + ": " + e.what();
            if (e.code() != "predictors.MalformedResponse") break;
        }
    }
    add_issue(issues, "tree.SummaryFallback",
              "node " + std::to_string(req.node_id) + " summarized extractively (" + last_error + ")");
    return fallback_.summarize(req, issues);
}

Issues summarize_nodes(DocTree& tree, Summarizer& sz, std::size_t jobs) {
    std::vector<DocNode*> nodes;
    auto collect = [&](auto&& self, DocNode& n) -> void {
        nodes.push_back(&n);
        for (auto& c : n.children) self(self, c);
    };
    collect(collect, tree.root);

    std::vector<Issues> per_node(nodes.size());
    parallel_for(nodes.size(), jobs, [&](std::size_t i) {
        auto& n = *nodes[i];
        SummaryRequest req{n.node_id, n.title_path, summary_paragraphs(n)};
        n.summary = sz.summarize(req, per_node[i]);
    });
    Issues out;
    for (auto& is : per_node) out.insert(out.end(), is.begin(), is.end());
    return out;
}

namespace {

Json page_box_json(const PageBox& pb) {
    Json j;
    j["page"] = pb.page;
    j["bbox"] = to_json(pb.bbox);
    return j;
}

PageBox page_box_from_json(const Json& j) {
    return PageBox{j.at("page").get<std::size_t>(), bbox_from_json(j.at("bbox"))};
}

Json node_json(const DocNode& n) {
    Json j;
    j["node_id"] = n.node_id;
    j["kind"] = std::string(to_string(n.kind));
    j["title"] = n.title_text ? Json(*n.title_text) : Json(nullptr);
    j["level"] = n.level;
    j["title_path"] = n.title_path;
    j["summary"] = n.summary ? Json(*n.summary) : Json(nullptr);
    Json body = Json::array();
    for (const auto& e : n.body) body.push_back(to_json(e));
    j["body"] = std::move(body);
    Json boxes = Json::array();
    for (const auto& pb : n.bboxes) boxes.push_back(page_box_json(pb));
    j["bboxes"] = std::move(boxes);
    Json children = Json::array();
    for (const auto& c : n.children) children.push_back(node_json(c));
    j["children"] = std::move(children);
    return j;
}

DocNode node_from_json(const Json& j) {
    DocNode n;
    n.node_id = j.at("node_id").get<std::size_t>();
    const auto kind = node_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw Error("tree.MalformedTree", "unknown node kind " + j.at("kind").dump());
    n.kind = *kind;
    if (!j.at("title").is_null()) n.title_text = j.at("title").get<std::string>();
    n.level = j.at("level").get<int>();
    n.title_path = j.at("title_path").get<std::vector<std::string>>();
    if (!j.at("summary").is_null()) n.summary = j.at("summary").get<std::string>();
    for (const auto& e : j.at("body")) n.body.push_back(element_from_json(e));
    for (const auto& pb : j.at("bboxes")) n.bboxes.push_back(page_box_from_json(pb));
    for (const auto& c : j.at("children")) n.children.push_back(node_from_json(c));
    return n;
}

} // namespace

Json tree_to_json(const DocTree& tree) {
    Json j;
    j["doc_id"] = tree.doc_id;
    Json extents = Json::array();
    for (const auto& [idx, boxes] : tree.merged_extents) {
        Json b = Json::array();
        for (const auto& pb : boxes) b.push_back(page_box_json(pb));
        extents.push_back(Json{{"idx", idx}, {"boxes", std::move(b)}});
    }
    j["merged_extents"] = std::move(extents);
    j["root"] = node_json(tree.root);
    return j;
}

DocTree tree_from_json(const Json& j) {
    try {
        DocTree t;
        t.doc_id = j.at("doc_id").get<std::string>();
        for (const auto& e : j.at("merged_extents")) {
            auto& boxes = t.merged_extents[e.at("idx").get<std::size_t>()];
            for (const auto& pb : e.at("boxes")) boxes.push_back(page_box_from_json(pb));
        }
        t.root = node_from_json(j.at("root"));
        return t;
    } catch (const Json::exception& e) {
        throw Error("tree.MalformedTree", e.what());
    } catch (const Error& e) {
        throw Error("tree.MalformedTree", e.what());
    }
}

namespace {

void markdown_element(const CanonicalElement& e, std::vector<std::string>& blocks) {
    switch (e.etype) {
    case ElementType::page_header:
    case ElementType::page_footer:
        return;
    case ElementType::table:
        if (e.table_html) {
            blocks.push_back(*e.table_html);
            return;
        }
        break;
    case ElementType::image:
        blocks.push_back("![](" + e.asset_ref.value_or("") + ")");
        return;
    default:
        break;
    }
    const auto t = text::trim(e.content);
    if (!t.empty()) blocks.emplace_back(t);
}

void markdown_node(const DocNode& n, std::vector<std::string>& blocks) {
    std::size_t first = 0;
    if (n.kind == NodeKind::section) {
        const auto level = static_cast<std::size_t>(std::max(1, n.level));
        blocks.push_back(std::string(level, '#') + " " + text::collapse_whitespace(n.title_text.value_or("")));
        first = 1;
    }
    for (std::size_t i = first; i < n.body.size(); ++i) markdown_element(n.body[i], blocks);
    for (const auto& c : n.children) markdown_node(c, blocks);
}

} // namespace

std::string export_markdown(const DocTree& tree) {
    std::vector<std::string> blocks;
    markdown_node(tree.root, blocks);
    std::string out;
    for (const auto& b : blocks) {
        if (!out.empty()) out += "\n\n";
        out += b;
    }
    out += '\n';
    return out;
}

} // namespace docstruct
