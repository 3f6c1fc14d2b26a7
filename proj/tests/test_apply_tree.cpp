#include <doctest.h>
#include <json.hpp>

#include <set>

#include "docstruct/apply.hpp"
#include "docstruct/pipeline.hpp"
#include "docstruct/tree.hpp"
#include "mock_backend.hpp"
#include "test_support.hpp"

using namespace docstruct;
using testsupport::el;
using testsupport::table_el;

namespace {

std::string error_code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

bool has_code(const Issues& issues, const std::string& code) {
    return std::any_of(issues.begin(), issues.end(), [&](const Issue& i) { return i.code == code; });
}

PairPrediction pairs(std::vector<std::pair<std::size_t, std::size_t>> p) { return PairPrediction{std::move(p)}; }

std::vector<std::string> row(const TableGrid& g, std::size_t r) { return g.row_texts(r); }

/// Compact outline: kind, level, title and body idx list per node, children
/// nested in braces.
std::string outline(const DocNode& n) {
    std::string s = std::string(to_string(n.kind)) + ":" + std::to_string(n.level);
    if (n.title_text) s += ":" + *n.title_text;
    s += "[";
    for (std::size_t i = 0; i < n.body.size(); ++i) s += (i ? "," : "") + std::to_string(n.body[i].idx);
    s += "]";
    if (!n.children.empty()) {
        s += "{";
        for (std::size_t i = 0; i < n.children.size(); ++i) s += (i ? " " : "") + outline(n.children[i]);
        s += "}";
    }
    return s;
}

ResolvedDocument with_levels(std::vector<CanonicalElement> els, std::vector<std::pair<std::size_t, int>> levels) {
    auto rd = resolve_start(testsupport::doc_of(std::move(els)));
    assign_levels(rd, HierarchyPrediction{std::move(levels)});
    return rd;
}

PipelineResult run_rules(const CanonicalDocument& doc, PipelineConfig cfg = {}) {
    auto predictor = make_predictor(cfg);
    auto summarizer = make_summarizer(cfg);
    return run_pipeline(doc, cfg, *predictor, summarizer.get());
}

} // namespace

TEST_SUITE("apply") {

TEST_CASE("a truncated sentence is rejoined with a space") {
    auto rd = resolve_start(testsupport::doc_of({el(0, ElementType::text, "We show that propagation can", 0),
                                                 el(1, ElementType::text, "be decomposed into two steps.", 1)}));
    merge_text(rd, pairs({{0, 1}}));
    REQUIRE(rd.doc.elements.size() == 1);
    CHECK(rd.doc.elements[0].content == "We show that propagation can be decomposed into two steps.");
    REQUIRE(rd.merge_log.size() == 1);
    CHECK(rd.merge_log[0].target_idx == 0);
    CHECK(rd.merge_log[0].absorbed == std::vector<std::size_t>{1});
    CHECK(rd.merge_log[0].absorbed_bboxes[0].page == 1);
    CHECK(rd.resolve(1) == 0);
}

TEST_CASE("a hyphenated word is rejoined without hyphen") {
    auto rd = resolve_start(
        testsupport::doc_of({el(0, ElementType::text, "can be decom-"), el(1, ElementType::text, "posed here.")}));
    merge_text(rd, pairs({{0, 1}}));
    CHECK(rd.doc.elements[0].content == "can be decomposed here.");
}

TEST_CASE("chains collapse into the first element") {
    auto rd = resolve_start(testsupport::doc_of({el(0, ElementType::text, "a"), el(1, ElementType::title, "T"),
                                                 el(2, ElementType::text, "b"), el(3, ElementType::text, "c"),
                                                 el(4, ElementType::text, "d.")}));
    merge_text(rd, pairs({{2, 3}, {0, 2}}));
    REQUIRE(rd.doc.elements.size() == 3);
    CHECK(rd.doc.elements[0].content == "a b c");
    CHECK(rd.doc.elements[2].content == "d.");
    REQUIRE(rd.merge_log.size() == 1);
    CHECK(rd.merge_log[0].absorbed == std::vector<std::size_t>{2, 3});
    CHECK(rd.resolve(3) == 0);
    CHECK(join_boundaries(rd) == std::set<std::pair<std::size_t, std::size_t>>{{0, 2}, {2, 3}});
}

TEST_CASE("bad pairs are skipped with issues") {
    auto rd = resolve_start(testsupport::doc_of({el(0, ElementType::text, "a"), el(1, ElementType::text, "b"),
                                                 el(2, ElementType::text, "c"), el(3, ElementType::title, "T")}));
    std::vector<TextPairCandidate> cands(1);
    cands[0].src_idx = 0;
    cands[0].tgt_idx = 1;
    merge_text(rd, pairs({{0, 1}, {0, 2}, {1, 0}, {2, 3}}), std::span<const TextPairCandidate>(cands));
    CHECK(rd.doc.elements.size() == 3);
    CHECK(has_code(rd.issues, "apply.PairNotAdjacent"));

    auto branch = resolve_start(testsupport::doc_of(
        {el(0, ElementType::text, "a"), el(1, ElementType::text, "b"), el(2, ElementType::text, "c")}));
    merge_text(branch, pairs({{0, 1}, {0, 2}}));
    CHECK(has_code(branch.issues, "apply.ChainConflict"));
    CHECK(branch.doc.elements.size() == 2);
}

TEST_CASE("table merge with an all-zero judgement stacks rows and drops a repeated header") {
    const auto up = parse_table_html("<table><tr><th>K</th><th>V</th></tr><tr><td>a</td><td>1</td></tr></table>");
    const auto lo = parse_table_html("<table><tr><td>K</td><td>V</td></tr><tr><td>b</td><td>2</td></tr></table>");
    const std::vector<int> j{0, 0};
    const auto out = merge_table_grids(up, lo, j);
    CHECK(out.header_dropped);
    CHECK(out.fused_cells.empty());
    REQUIRE(out.grid.rows() == 3);
    CHECK(row(out.grid, 2) == std::vector<std::string>{"b", "2"});
    CHECK(out.grid.rectangular());
}

TEST_CASE("table merge fuses one column next to a vertical span") {
    const auto up = parse_table_html(
        "<table><tr><th>K</th><th>A</th><th>B</th></tr>"
        "<tr><td rowspan=\"2\">g</td><td>x1</td><td>y1</td></tr>"
        "<tr><td>x2 un</td><td>y2.</td></tr></table>");
    const auto lo = parse_table_html("<table><tr><td>h</td><td>finished</td><td>z</td></tr></table>");
    const std::vector<int> j{0, 1, 0};
    const auto out = merge_table_grids(up, lo, j);
    const auto& g = out.grid;
    REQUIRE(g.rows() == 4);
    CHECK(g.columns() == 3);
    CHECK(g.rectangular());
    CHECK(g.at(2, 1).text == "x2 un finished");
    CHECK(g.slots[2][1] == g.slots[3][1]);
    CHECK(g.slots[1][0] == g.slots[2][0]);
    CHECK(g.at(3, 0).text == "h");
    REQUIRE(out.fused_cells.size() == 1);
    CHECK(out.fused_cells[0] == FusedCell{"x2 un", "finished", "x2 un finished"});
    CHECK(to_html(g).find("rowspan=\"2\">x2 un finished") != std::string::npos);
}

TEST_CASE("a fully fused boundary collapses into one row") {
    const auto up = parse_table_html("<table><tr><th>A</th><th>B</th></tr><tr><td>meth-</td><td>long</td></tr></table>");
    const auto lo = parse_table_html("<table><tr><td>od</td><td>text</td></tr><tr><td>n</td><td>m</td></tr></table>");
    const std::vector<int> j{1, 1};
    const auto out = merge_table_grids(up, lo, j);
    REQUIRE(out.grid.rows() == 3);
    CHECK(row(out.grid, 1) == std::vector<std::string>{"method", "long text"});
    CHECK(row(out.grid, 2) == std::vector<std::string>{"n", "m"});
}

TEST_CASE("table merge errors") {
    const auto two = parse_table_html("<table><tr><td>a</td><td>b</td></tr></table>");
    const auto three = parse_table_html("<table><tr><td>a</td><td>b</td><td>c</td></tr></table>");
    const std::vector<int> j2{0, 0};
    const std::vector<int> j3{0, 0, 0};
    CHECK(error_code_of([&] { merge_table_grids(two, three, j2); }) == "apply.ColumnMismatch");
    CHECK(error_code_of([&] { merge_table_grids(two, two, j3); }) == "apply.ColumnMismatch");

    auto rd = resolve_start(testsupport::doc_of(
        {table_el(0, "<table><tr><td>a</td><td>b</td></tr></table>", 0),
         table_el(1, "<table><tr><td>a</td><td>b</td><td>c</td></tr></table>", 1), el(2, ElementType::text, "t", 1)}));
    TablePairCandidate c;
    c.upper_idx = 0;
    c.lower_idx = 1;
    merge_tables(rd, c, CellMergeJudgement{{0, 0}});
    CHECK(has_code(rd.issues, "apply.ColumnMismatch"));
    CHECK(rd.doc.elements.size() == 3);
    c.lower_idx = 2;
    merge_tables(rd, c, CellMergeJudgement{{0, 0}});
    CHECK(has_code(rd.issues, "apply.TableMissing"));
    const auto before = rd.doc;
    merge_tables(rd, c, CellMergeJudgement{});
    CHECK(rd.doc == before);
}

TEST_CASE("merge_tables rewrites the upper table and aliases the lower") {
    auto rd = resolve_start(testsupport::doc_of(
        {table_el(0, "<table><tr><th>K</th></tr><tr><td>a</td></tr></table>", 0),
         el(1, ElementType::table_caption, "Table 1 (continued)", 1),
         table_el(2, "<table><tr><td>b</td></tr></table>", 1)}));
    TablePairCandidate c;
    c.upper_idx = 0;
    c.lower_idx = 2;
    merge_tables(rd, c, CellMergeJudgement{{0}});
    CHECK(rd.doc.elements.size() == 2);
    CHECK(rd.resolve(2) == 0);
    const auto g = parse_table_html(*rd.doc.find(0)->table_html);
    CHECK(g.rows() == 3);
    CHECK(g.at(0, 0).header);
    attach_links(rd, pairs({{1, 2}}));
    CHECK(rd.caption_links.at(1) == 0);
}

TEST_CASE("assign_levels") {
    auto rd = with_levels({el(0, ElementType::title, "A"), el(1, ElementType::text, "x"),
                           el(2, ElementType::title, "B"), el(3, ElementType::title, "C"),
                           el(4, ElementType::title, "D")},
                          {{0, 1}, {2, 3}, {3, -1}, {1, 2}});
    CHECK(rd.levels == std::map<std::size_t, int>{{0, 1}, {2, 3}, {4, 3}});
    CHECK(rd.doc.find(3)->etype == ElementType::text);
    CHECK(rd.demoted == std::vector<std::size_t>{3});
    CHECK(has_code(rd.issues, "apply.UnknownIdx"));
    REQUIRE(has_code(rd.issues, "apply.UnknownTitle"));
    const auto it = std::find_if(rd.issues.begin(), rd.issues.end(),
                                 [](const Issue& i) { return i.code == "apply.UnknownTitle"; });
    CHECK(it->idx == std::optional<std::size_t>(4));
}

TEST_CASE("attach_links") {
    auto rd = resolve_start(testsupport::doc_of(
        {el(0, ElementType::title, "T"), el(1, ElementType::image, ""), el(2, ElementType::image_caption, "Fig 1"),
         table_el(3, "<table><tr><td>a</td></tr></table>"), el(4, ElementType::table_caption, "Table 1"),
         el(5, ElementType::image, "")}));
    attach_links(rd, pairs({{1, 0}, {2, 1}, {3, 0}, {4, 3}, {4, 1}, {2, 3}, {9, 0}, {1, 0}}));
    CHECK(rd.section_links == std::map<std::size_t, std::size_t>{{1, 0}, {3, 0}});
    CHECK(rd.caption_links == std::map<std::size_t, std::size_t>{{2, 1}, {4, 3}});
    CHECK(has_code(rd.issues, "apply.TypeRuleViolation"));
    CHECK(has_code(rd.issues, "apply.UnknownIdx"));
    CHECK(has_code(rd.issues, "apply.UnlinkedVisual"));
    CHECK_FALSE(has_code(rd.issues, "apply.DuplicateLink"));

    attach_links(rd, pairs({{1, 0}, {5, 0}, {4, 3}}));
    CHECK(rd.section_links.at(5) == 0);
}

TEST_CASE("applying the same predictions twice changes nothing") {
    auto rd = resolve_start(testsupport::doc_of({el(0, ElementType::title, "T"), el(1, ElementType::text, "a"),
                                                 el(2, ElementType::text, "b"), el(3, ElementType::image, "")}));
    const HierarchyPrediction h{{{0, 2}}};
    const auto p = pairs({{1, 2}});
    const auto links = pairs({{3, 0}});
    merge_text(rd, p);
    assign_levels(rd, h);
    attach_links(rd, links);
    const auto doc = rd.doc;
    const auto levels = rd.levels;
    const auto sections = rd.section_links;
    const auto log_size = rd.merge_log.size();
    merge_text(rd, p);
    assign_levels(rd, h);
    attach_links(rd, links);
    CHECK(rd.doc == doc);
    CHECK(rd.levels == levels);
    CHECK(rd.section_links == sections);
    CHECK(rd.merge_log.size() == log_size);
}

TEST_CASE("merge log JSON") {
    auto rd = resolve_start(testsupport::doc_of({el(0, ElementType::text, "a"), el(1, ElementType::text, "b")}));
    merge_text(rd, pairs({{0, 1}}));
    const auto j = merge_log_json(rd);
    CHECK(j.at("merges").size() == 1);
    CHECK(j.at("merges")[0].at("kind") == "text");
    CHECK(j.at("alias")[0].at("from") == 1);
    CHECK(j.at("alias")[0].at("to") == 0);
}

TEST_CASE("property: merging conserves text and table cells on every corpus document") {
    for (const auto& name : testsupport::corpus_names()) {
        CAPTURE(name);
        const auto doc = testsupport::load_corpus_doc(name);
        const auto r = run_rules(doc);
        const auto v = testsupport::conservation_violations(doc, r.resolved);
        CHECK(v.empty());
        for (const auto& msg : v) MESSAGE(msg);
    }
}

} // TEST_SUITE

TEST_SUITE("tree") {

TEST_CASE("levels 1 2 2 1 give two top sections") {
    const auto rd = with_levels({el(0, ElementType::title, "A"), el(1, ElementType::title, "B"),
                                 el(2, ElementType::text, "b"), el(3, ElementType::title, "C"),
                                 el(4, ElementType::title, "D")},
                                {{0, 1}, {1, 2}, {3, 2}, {4, 1}});
    const auto t = build_tree(rd).tree;
    CHECK(outline(t.root) == "root:0[]{section:1:A[0]{section:2:B[1,2] section:2:C[3]} section:1:D[4]}");
    CHECK(t.root.children[0].children[1].title_path == std::vector<std::string>{"A", "C"});
}

TEST_CASE("a level jump nests directly") {
    const auto rd = with_levels({el(0, ElementType::title, "A"), el(1, ElementType::title, "B")}, {{0, 1}, {1, 3}});
    CHECK(outline(build_tree(rd).tree.root) == "root:0[]{section:1:A[0]{section:3:B[1]}}");
}

TEST_CASE("preamble, headers and visuals") {
    auto rd = resolve_start(testsupport::doc_of(
        {el(0, ElementType::page_header, "HDR"), el(1, ElementType::text, "pre"), el(2, ElementType::title, "A"),
         el(3, ElementType::image, ""), el(4, ElementType::image_caption, "Fig"), el(5, ElementType::title, "B"),
         el(6, ElementType::text, "b"), el(7, ElementType::page_footer, "3")}));
    assign_levels(rd, HierarchyPrediction{{{2, 1}, {5, 2}}});
    attach_links(rd, pairs({{3, 2}, {4, 3}}));
    const auto r = build_tree(rd);
    CHECK(outline(r.tree.root) ==
          "root:0[0,1,7]{section:1:A[2]{visual:1[3,4] section:2:B[5,6]}}");
    CHECK(r.issues.empty());
}

TEST_CASE("unlinked visual falls back to the open section") {
    auto rd = resolve_start(testsupport::doc_of(
        {el(0, ElementType::title, "A"), el(1, ElementType::image, ""), el(2, ElementType::text, "x")}));
    assign_levels(rd, HierarchyPrediction{{{0, 1}}});
    const auto r = build_tree(rd);
    CHECK(outline(r.tree.root) == "root:0[]{section:1:A[0,2]{visual:1[1]}}");
    CHECK(has_code(r.issues, "tree.VisualFallback"));
}

TEST_CASE("subnode planning") {
    const std::vector<std::size_t> five(5, 400);
    CHECK(plan_subnodes(five, {}, 1000) == std::vector<std::size_t>{3, 5});
    CHECK(plan_subnodes(five, {false, false, true, false}, 1000) == std::vector<std::size_t>{4, 5});
    CHECK(plan_subnodes(five, {}, 100000) == std::vector<std::size_t>{5});
    const std::vector<std::size_t> none;
    CHECK(plan_subnodes(none, {}, 10).empty());
}

TEST_CASE("chunk_nodes splits long sections") {
    std::vector<CanonicalElement> els{el(0, ElementType::title, "A")};
    for (std::size_t i = 1; i <= 5; ++i) els.push_back(el(i, ElementType::text, std::string(400, 'a')));
    const auto rd = with_levels(els, {{0, 1}});
    const auto t = chunk_nodes(build_tree(rd).tree, 1000);
    CHECK(outline(t.root) == "root:0[]{section:1:A[0]{subnode:1[1,2,3] subnode:1[4,5]}}");
    CHECK(t.root.children[0].children[1].node_id == 3);
    const auto joined = chunk_nodes(build_tree(rd).tree, 1000, {{3, 4}});
    CHECK(outline(joined.root) == "root:0[]{section:1:A[0]{subnode:1[1,2,3,4] subnode:1[5]}}");
    CHECK(error_code_of([&] { chunk_nodes(build_tree(rd).tree, 0); }) == "tree.BadThreshold");
}

TEST_CASE("property: every surviving element appears in exactly one node") {
    for (const auto& name : testsupport::corpus_names()) {
        CAPTURE(name);
        const auto r = run_rules(testsupport::load_corpus_doc(name));
        std::multiset<std::size_t> seen;
        for_each_node(r.tree.root, [&](const DocNode& n) {
            for (const auto& e : n.body) seen.insert(e.idx);
        });
        std::multiset<std::size_t> expected;
        for (const auto& e : r.resolved.doc.elements) expected.insert(e.idx);
        CHECK(seen == expected);
        std::size_t next = 0;
        for_each_node(r.tree.root, [&](const DocNode& n) { CHECK(n.node_id == next++); });
        for_each_node(r.tree.root, [&](const DocNode& n) {
            for (const auto& c : n.children) {
                if (c.kind == NodeKind::section) CHECK(c.level > n.level);
            }
        });
    }
}

TEST_CASE("hand-built tree for the memo document") {
    const auto r = run_rules(testsupport::load_corpus_doc("one_page_memo"));
    CHECK(outline(r.tree.root) ==
          "root:0[]{section:1:1 Memo[0,1]{section:2:1.1 Decisions[2]{section:3:1.1.1 Budget[3]{"
          "section:4:1.1.1.1 Travel[4,5]{visual:4[6,7]} section:4:1.1.1.2 Training[8,9]}}}}");
    const auto& travel = r.tree.root.children[0].children[0].children[0].children[0];
    CHECK(travel.title_path ==
          std::vector<std::string>{"1 Memo", "1.1 Decisions", "1.1.1 Budget", "1.1.1.1 Travel"});
    REQUIRE(travel.summary);
    CHECK(*travel.summary == "Travel spending is capped at last year's level.");
    CHECK(*r.tree.root.children[0].children[0].summary == "1.1 Decisions");
}

TEST_CASE("extractive summaries") {
    ExtractiveSummarizer sz(2, 400);
    Issues issues;
    CHECK(sz.summarize({1, {"Intro"}, {}}, issues) == "Intro");
    CHECK(sz.summarize({1, {"Intro"}, {"One here. Two here. Three here."}}, issues) == "One here. Two here.");
    CHECK(sz.summarize({1, {"Intro"}, {"Only one.", "Then two. And three."}}, issues) == "Only one. Then two.");
    ExtractiveSummarizer tiny(2, 5);
    CHECK(tiny.summarize({1, {}, {"Abcdefgh."}}, issues) == "Abcde");
    CHECK(issues.empty());
}

TEST_CASE("remote summaries: passthrough, cap and fallback") {
    testsupport::MockBackend backend([](const Json& req, const httplib::Request&) {
        const auto id = req.at("node_id").get<int>();
        if (id == 1) return testsupport::MockBackend::Reply{200, Json{{"summary", "short"}}.dump()};
        if (id == 2) return testsupport::MockBackend::Reply{200, Json{{"summary", std::string(50, 'x')}}.dump()};
        return testsupport::MockBackend::Reply{200, "{\"nope\":1}"};
    });
    RemoteSummarizer sz(BackendConfig{backend.url(), 5000, std::nullopt}, ExtractiveSummarizer(2, 10), 0);
    Issues issues;
    CHECK(sz.summarize({1, {"T"}, {"p."}}, issues) == "short");
    CHECK(issues.empty());
    CHECK(sz.summarize({2, {"T"}, {"p."}}, issues) == std::string(10, 'x'));
    CHECK(has_code(issues, "tree.SummaryTruncated"));
    CHECK(sz.summarize({3, {"T"}, {"Fallback text."}}, issues) == "Fallback t");
    CHECK(has_code(issues, "tree.SummaryFallback"));
    CHECK(backend.requests()[0].at("title_path") == Json::array({"T"}));
}

TEST_CASE("tree JSON round-trips to a fixpoint") {
    for (const auto& name : testsupport::corpus_names()) {
        CAPTURE(name);
        const auto r = run_rules(testsupport::load_corpus_doc(name));
        const auto j = tree_to_json(r.tree);
        const auto back = tree_from_json(j);
        CHECK(back == r.tree);
        CHECK(tree_to_json(back).dump() == j.dump());
    }
    CHECK(error_code_of([] { tree_from_json(Json::parse(R"({"doc_id":"x"})")); }) == "tree.MalformedTree");
    CHECK(error_code_of([] {
              tree_from_json(Json::parse(R"({"doc_id":"x","merged_extents":[],"root":{"node_id":0,"kind":"leaf"}})"));
          }) == "tree.MalformedTree");
}

TEST_CASE("markdown export") {
    const auto rd = with_levels({el(0, ElementType::title, "Report"), el(1, ElementType::text, "Body text."),
                                 el(2, ElementType::title, "Deep"), el(3, ElementType::page_footer, "7")},
                                {{0, 1}, {2, 3}});
    const auto md = export_markdown(build_tree(rd).tree);
    CHECK(md == "# Report\n\nBody text.\n\n### Deep\n");
}

} // TEST_SUITE
