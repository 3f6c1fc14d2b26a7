#include "docstruct/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "docstruct/ingest.hpp"
#include "docstruct/text_util.hpp"

namespace docstruct {

std::size_t LabeledTree::size() const {
    std::size_t n = 1;
    for (const auto& c : children) n += c.size();
    return n;
}

namespace {

std::size_t prepare_into(const LabeledTree& t, PreparedTree& out) {
    std::optional<std::size_t> first_leaf;
    for (const auto& c : t.children) {
        const auto leaf = prepare_into(c, out);
        if (!first_leaf) first_leaf = leaf;
    }
    const auto self = out.labels.size();
    out.labels.push_back(t.label);
    out.leftmost.push_back(first_leaf.value_or(self));
    return out.leftmost.back();
}

} // namespace

PreparedTree prepare(const LabeledTree& t) {
    PreparedTree p;
    prepare_into(t, p);
    const auto n = p.labels.size();
    std::vector<bool> seen(n, false);
    for (std::size_t i = n; i-- > 0;) {
        if (!seen[p.leftmost[i]]) {
            seen[p.leftmost[i]] = true;
            p.keyroots.push_back(i);
        }
    }
    std::sort(p.keyroots.begin(), p.keyroots.end());
    return p;
}

std::size_t tree_edit_distance(const PreparedTree& a, const PreparedTree& b) {
    const std::size_t na = a.labels.size();
    const std::size_t nb = b.labels.size();
    if (na == 0) return nb;
    if (nb == 0) return na;
    thread_local std::vector<std::size_t> td;
    thread_local std::vector<std::size_t> fd;
    td.assign(na * nb, 0);
    fd.resize((na + 1) * (nb + 1));
    const std::size_t w = nb + 1;

    for (const auto i : a.keyroots) {
        for (const auto j : b.keyroots) {
            const std::size_t li = a.leftmost[i];
            const std::size_t lj = b.leftmost[j];
            const std::size_t rows = i - li + 2;
            const std::size_t cols = j - lj + 2;
            fd[0] = 0;
            for (std::size_t x = 1; x < rows; ++x) fd[x * w] = fd[(x - 1) * w] + 1;
            for (std::size_t y = 1; y < cols; ++y) fd[y] = fd[y - 1] + 1;
            for (std::size_t x = 1; x < rows; ++x) {
                const std::size_t di = li + x - 1;
                for (std::size_t y = 1; y < cols; ++y) {
                    const std::size_t dj = lj + y - 1;
                    const std::size_t del = fd[(x - 1) * w + y] + 1;
                    const std::size_t ins = fd[x * w + y - 1] + 1;
                    std::size_t best = std::min(del, ins);
                    if (a.leftmost[di] == li && b.leftmost[dj] == lj) {
                        const std::size_t rel = fd[(x - 1) * w + y - 1] + (a.labels[di] == b.labels[dj] ? 0 : 1);
                        best = std::min(best, rel);
                        td[di * nb + dj] = best;
                    } else {
                        const std::size_t p = a.leftmost[di] - li;
                        const std::size_t q = b.leftmost[dj] - lj;
                        best = std::min(best, fd[p * w + q] + td[di * nb + dj]);
                    }
                    fd[x * w + y] = best;
                }
            }
        }
    }
    return td[(na - 1) * nb + (nb - 1)];
}

std::size_t tree_edit_distance(const LabeledTree& a, const LabeledTree& b) {
    return tree_edit_distance(prepare(a), prepare(b));
}

double teds(const LabeledTree& a, const LabeledTree& b) {
    const auto n = std::max(a.size(), b.size());
    return 1.0 - static_cast<double>(tree_edit_distance(a, b)) / static_cast<double>(n);
}

std::string normalize_label(std::string_view title) { return text::collapse_whitespace(text::trim(title)); }

LabeledTree hierarchy_tree(std::span<const std::pair<std::string, int>> titles) {
    struct Node {
        std::string label;
        int level = 0;
        std::vector<std::size_t> kids;
    };
    std::vector<Node> nodes(1);
    std::vector<std::size_t> stack;
    for (const auto& [label, level] : titles) {
        if (level < 1) continue;
        while (!stack.empty() && nodes[stack.back()].level >= level) stack.pop_back();
        const auto parent = stack.empty() ? 0 : stack.back();
        nodes.push_back(Node{normalize_label(label), level, {}});
        nodes[parent].kids.push_back(nodes.size() - 1);
        stack.push_back(nodes.size() - 1);
    }
    auto build = [&](auto&& self, std::size_t i) -> LabeledTree {
        LabeledTree t{nodes[i].label, {}};
        for (auto k : nodes[i].kids) t.children.push_back(self(self, k));
        return t;
    };
    return build(build, 0);
}

PRF prf_from_counts(std::size_t tp, std::size_t predicted, std::size_t gold) {
    PRF r;
    r.true_positives = tp;
    r.predicted = predicted;
    r.gold = gold;
    if (predicted == 0) {
        r.precision = 1.0;
        r.vacuous_precision = true;
    } else {
        r.precision = static_cast<double>(tp) / static_cast<double>(predicted);
    }
    r.recall = gold == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(gold);
    if (predicted == 0 && gold > 0) {
        r.f1 = 0.0;
    } else {
        const double s = r.precision + r.recall;
        r.f1 = s == 0 ? 0.0 : 2 * r.precision * r.recall / s;
    }
    return r;
}

PRF pair_prf(std::span<const IdxPair> pred, std::span<const IdxPair> gold) {
    const std::set<IdxPair> p(pred.begin(), pred.end());
    const std::set<IdxPair> g(gold.begin(), gold.end());
    std::size_t tp = 0;
    for (const auto& x : p) tp += g.count(x);
    return prf_from_counts(tp, p.size(), g.size());
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

std::optional<double> MergeAccuracy::per_unit() const { return ratio(units_correct, units_total); }
std::optional<double> MergeAccuracy::per_column() const { return ratio(columns_correct, columns_total); }
std::optional<double> MergeAccuracy::per_pair() const { return ratio(pairs_correct, pairs_total); }
std::optional<double> MergeAccuracy::per_vector() const { return ratio(vectors_correct, vectors_total); }

MergeAccuracy& MergeAccuracy::operator+=(const MergeAccuracy& o) {
    units_correct += o.units_correct;
    units_total += o.units_total;
    columns_correct += o.columns_correct;
    columns_total += o.columns_total;
    pairs_correct += o.pairs_correct;
    pairs_total += o.pairs_total;
    vectors_correct += o.vectors_correct;
    vectors_total += o.vectors_total;
    length_mismatches += o.length_mismatches;
    return *this;
}

MergeAccuracy merge_accuracy(std::span<const CellMergeJudgement> preds, std::span<const CellMergeJudgement> golds) {
    if (preds.size() != golds.size()) {
        throw Error("eval.LengthMismatch", std::to_string(preds.size()) + " predicted judgements for " +
                                               std::to_string(golds.size()) + " gold judgements");
    }
    MergeAccuracy m;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& p = preds[i].columns;
        const auto& g = golds[i].columns;
        ++m.pairs_total;
        ++m.vectors_total;
        if (p == g) ++m.vectors_correct;
        if (p.empty() == g.empty()) ++m.pairs_correct;
        if (p.empty() || g.empty()) continue;
        if (p.size() != g.size()) {
            ++m.length_mismatches;
            m.columns_total += std::max(p.size(), g.size());
            continue;
        }
        m.columns_total += p.size();
        for (std::size_t j = 0; j < p.size(); ++j) m.columns_correct += p[j] == g[j] ? 1 : 0;
    }
    m.units_correct = m.pairs_correct + m.columns_correct;
    m.units_total = m.pairs_total + m.columns_total;
    return m;
}

namespace {

struct AreaSums {
    double inter = 0;
    double gold = 0;
    double uni = 0;
};

// Coordinate compression over both box sets at once.
AreaSums overlap_areas(std::span<const BBox> r, std::span<const BBox> g) {
    std::vector<double> xs, ys;
    for (auto set : {r, g}) {
        for (const auto& b : set) {
            if (!b.valid()) continue;
            xs.insert(xs.end(), {b.x0, b.x1});
            ys.insert(ys.end(), {b.y0, b.y1});
        }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    AreaSums s;
    auto covers = [](std::span<const BBox> set, double cx, double cy) {
        return std::any_of(set.begin(), set.end(), [&](const BBox& b) {
            return b.valid() && b.x0 <= cx && cx <= b.x1 && b.y0 <= cy && cy <= b.y1;
        });
    };
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            const double cx = (xs[i] + xs[i + 1]) / 2;
            const double cy = (ys[j] + ys[j + 1]) / 2;
            const bool in_r = covers(r, cx, cy);
            const bool in_g = covers(g, cx, cy);
            if (!in_r && !in_g) continue;
            const double area = (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
            s.uni += area;
            if (in_g) s.gold += area;
            if (in_r && in_g) s.inter += area;
        }
    }
    return s;
}

} // namespace

double union_area(std::span<const BBox> boxes) { return overlap_areas(boxes, {}).uni; }

BBoxScores bbox_scores(std::span<const PageBox> retrieved, std::span<const PageBox> gold) {
    std::map<std::size_t, std::pair<std::vector<BBox>, std::vector<BBox>>> pages;
    for (const auto& pb : retrieved) pages[pb.page].first.push_back(pb.bbox);
    for (const auto& pb : gold) pages[pb.page].second.push_back(pb.bbox);
    BBoxScores out;
    for (const auto& [page, sets] : pages) {
        const auto s = overlap_areas(sets.first, sets.second);
        out.intersection_area += s.inter;
        out.gold_area += s.gold;
        out.union_area += s.uni;
    }
    if (out.gold_area > 0) out.recall = out.intersection_area / out.gold_area;
    if (out.union_area > 0) out.iou = out.intersection_area / out.union_area;
    return out;
}

// -- annotation files -------------------------------------------------------

namespace {

[[noreturn]] void mismatch(const std::string& why) { throw Error("eval.SchemaMismatch", why); }

void only_keys(const Json& j, std::initializer_list<std::string_view> keys, const std::string& where) {
    if (!j.is_object()) mismatch(where + " must be an object");
    for (const auto& [k, _] : j.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) mismatch("unknown key '" + k + "' in " + where);
    }
}

std::size_t get_idx(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<long long>() < 0) {
        mismatch(where + "." + key + " must be a non-negative integer");
    }
    return j.at(key).get<std::size_t>();
}

const Json& get_array(const Json& j, const char* key) {
    static const Json empty = Json::array();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_array()) mismatch(std::string(key) + " must be an array");
    return j.at(key);
}

std::vector<IdxPair> pairs_from(const Json& j, const char* key) {
    std::vector<IdxPair> out;
    for (const auto& e : get_array(j, key)) {
        only_keys(e, {"src", "tgt", "reason"}, key);
        out.emplace_back(get_idx(e, "src", key), get_idx(e, "tgt", key));
    }
    return out;
}

Json pairs_json(const std::vector<IdxPair>& pairs) {
    Json arr = Json::array();
    for (const auto& [s, t] : pairs) arr.push_back(Json{{"src", s}, {"tgt", t}});
    return arr;
}

} // namespace

GoldAnnotations annotations_from_json(const Json& j) {
    only_keys(j, {"version", "doc_id", "hierarchy", "text_truncation", "association", "table_truncation", "evidence"},
              "annotation");
    GoldAnnotations g;
    if (!j.contains("version") || !j.at("version").is_number_integer()) mismatch("version must be an integer");
    g.version = j.at("version").get<int>();
    if (g.version != kAnnotationVersion) mismatch("unsupported annotation version " + std::to_string(g.version));
    if (!j.contains("doc_id") || !j.at("doc_id").is_string()) mismatch("doc_id must be a string");
    g.doc_id = j.at("doc_id").get<std::string>();

    std::set<std::size_t> seen;
    for (const auto& e : get_array(j, "hierarchy")) {
        only_keys(e, {"idx", "level", "content"}, "hierarchy");
        HierarchyEntry h;
        h.idx = get_idx(e, "idx", "hierarchy");
        if (!e.contains("level") || !e.at("level").is_number_integer()) mismatch("hierarchy.level must be an integer");
        h.level = e.at("level").get<int>();
        if (h.level < 1 && h.level != -1) mismatch("hierarchy.level must be >= 1 or -1");
        if (!e.contains("content") || !e.at("content").is_string()) mismatch("hierarchy.content must be a string");
        h.content = e.at("content").get<std::string>();
        if (!seen.insert(h.idx).second) mismatch("hierarchy repeats idx " + std::to_string(h.idx));
        g.hierarchy.push_back(std::move(h));
    }
    g.text_truncation = pairs_from(j, "text_truncation");
    g.association = pairs_from(j, "association");
    for (const auto& e : get_array(j, "table_truncation")) {
        only_keys(e, {"upper", "lower", "judgement"}, "table_truncation");
        TableEntry t;
        t.upper = get_idx(e, "upper", "table_truncation");
        t.lower = get_idx(e, "lower", "table_truncation");
        if (!e.contains("judgement") || !e.at("judgement").is_array()) {
            mismatch("table_truncation.judgement must be an array");
        }
        for (const auto& v : e.at("judgement")) {
            if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
                mismatch("table_truncation.judgement entries must be 0 or 1");
            }
            t.judgement.push_back(v.get<int>());
        }
        g.table_truncation.push_back(std::move(t));
    }
    for (const auto& e : get_array(j, "evidence")) {
        only_keys(e, {"query", "boxes"}, "evidence");
        EvidenceEntry ev;
        if (!e.contains("query") || !e.at("query").is_string()) mismatch("evidence.query must be a string");
        ev.query = e.at("query").get<std::string>();
        for (const auto& b : get_array(e, "boxes")) {
            only_keys(b, {"page", "bbox"}, "evidence.boxes");
            try {
                ev.boxes.push_back({get_idx(b, "page", "evidence.boxes"), bbox_from_json(b.at("bbox"))});
            } catch (const Json::exception& ex) {
                mismatch(std::string("evidence.boxes: ") + ex.what());
            } catch (const Error& ex) {
                mismatch(std::string("evidence.boxes: ") + ex.what());
            }
        }
        g.evidence.push_back(std::move(ev));
    }
    return g;
}

Json to_json(const GoldAnnotations& g) {
    Json j;
    j["version"] = g.version;
    j["doc_id"] = g.doc_id;
    Json h = Json::array();
    for (const auto& e : g.hierarchy) h.push_back(Json{{"idx", e.idx}, {"level", e.level}, {"content", e.content}});
    j["hierarchy"] = std::move(h);
    j["text_truncation"] = pairs_json(g.text_truncation);
    j["association"] = pairs_json(g.association);
    Json t = Json::array();
    for (const auto& e : g.table_truncation) {
        t.push_back(Json{{"upper", e.upper}, {"lower", e.lower}, {"judgement", e.judgement}});
    }
    j["table_truncation"] = std::move(t);
    Json ev = Json::array();
    for (const auto& e : g.evidence) {
        Json boxes = Json::array();
        for (const auto& pb : e.boxes) boxes.push_back(Json{{"page", pb.page}, {"bbox", to_json(pb.bbox)}});
        ev.push_back(Json{{"query", e.query}, {"boxes", std::move(boxes)}});
    }
    j["evidence"] = std::move(ev);
    return j;
}

Issues validate_annotations(const GoldAnnotations& g, const CanonicalDocument& doc) {
    Issues out;
    auto check = [&](std::size_t idx, const char* where) {
        if (!doc.find(idx)) add_issue(out, "eval.SchemaMismatch", std::string(where) + " names a missing idx", idx);
    };
    for (const auto& h : g.hierarchy) check(h.idx, "hierarchy");
    for (const auto& [s, t] : g.text_truncation) {
        check(s, "text_truncation");
        check(t, "text_truncation");
    }
    for (const auto& [s, t] : g.association) {
        check(s, "association");
        check(t, "association");
    }
    for (const auto& e : g.table_truncation) {
        check(e.upper, "table_truncation");
        check(e.lower, "table_truncation");
    }
    return out;
}

namespace {

LabeledTree tree_of(const GoldAnnotations& g) {
    auto entries = g.hierarchy;
    std::sort(entries.begin(), entries.end(),
              [](const HierarchyEntry& a, const HierarchyEntry& b) { return a.idx < b.idx; });
    std::vector<std::pair<std::string, int>> titles;
    for (const auto& e : entries) titles.emplace_back(e.content, e.level);
    return hierarchy_tree(titles);
}

void accumulate(std::optional<BBoxScores>& acc, const BBoxScores& s) {
    if (!acc) acc = BBoxScores{};
    acc->intersection_area += s.intersection_area;
    acc->gold_area += s.gold_area;
    acc->union_area += s.union_area;
    acc->recall = acc->gold_area > 0 ? std::optional(acc->intersection_area / acc->gold_area) : std::nullopt;
    acc->iou = acc->union_area > 0 ? std::optional(acc->intersection_area / acc->union_area) : std::nullopt;
}

} // namespace

DocScores score_document(const GoldAnnotations& pred, const GoldAnnotations& gold) {
    DocScores s;
    s.doc_id = gold.doc_id;
    s.teds = teds(tree_of(pred), tree_of(gold));
    s.text_truncation = pair_prf(pred.text_truncation, gold.text_truncation);
    s.association = pair_prf(pred.association, gold.association);

    std::map<IdxPair, std::pair<CellMergeJudgement, CellMergeJudgement>> aligned;
    for (const auto& t : pred.table_truncation) aligned[{t.upper, t.lower}].first.columns = t.judgement;
    for (const auto& t : gold.table_truncation) aligned[{t.upper, t.lower}].second.columns = t.judgement;
    std::vector<CellMergeJudgement> p, g;
    for (const auto& [_, v] : aligned) {
        p.push_back(v.first);
        g.push_back(v.second);
    }
    s.table_merge = merge_accuracy(p, g);

    for (const auto& ge : gold.evidence) {
        const auto pe = std::find_if(pred.evidence.begin(), pred.evidence.end(),
                                     [&](const EvidenceEntry& e) { return e.query == ge.query; });
        const std::vector<PageBox> none;
        accumulate(s.evidence, bbox_scores(pe == pred.evidence.end() ? none : pe->boxes, ge.boxes));
    }
    return s;
}

EvalReport evaluate(std::span<const std::pair<GoldAnnotations, GoldAnnotations>> pred_gold) {
    EvalReport r;
    double teds_sum = 0;
    std::size_t teds_n = 0;
    std::size_t ttp = 0, tp_ = 0, tg = 0, atp = 0, ap = 0, ag = 0;
    for (const auto& [pred, gold] : pred_gold) {
        auto s = score_document(pred, gold);
        if (s.teds) {
            teds_sum += *s.teds;
            ++teds_n;
        }
        ttp += s.text_truncation.true_positives;
        tp_ += s.text_truncation.predicted;
        tg += s.text_truncation.gold;
        atp += s.association.true_positives;
        ap += s.association.predicted;
        ag += s.association.gold;
        r.table_merge += s.table_merge;
        if (s.evidence) accumulate(r.evidence, *s.evidence);
        r.documents.push_back(std::move(s));
    }
    if (teds_n) r.mean_teds = teds_sum / static_cast<double>(teds_n);
    r.text_truncation = prf_from_counts(ttp, tp_, tg);
    r.association = prf_from_counts(atp, ap, ag);
    return r;
}

namespace {

Json opt(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

Json prf_json(const PRF& p) {
    Json j;
    j["precision"] = p.precision;
    j["recall"] = p.recall;
    j["f1"] = p.f1;
    j["vacuous_precision"] = p.vacuous_precision;
    j["true_positives"] = p.true_positives;
    j["predicted"] = p.predicted;
    j["gold"] = p.gold;
    return j;
}

Json merge_json(const MergeAccuracy& m) {
    Json j;
    j["per_unit"] = opt(m.per_unit());
    j["per_column"] = opt(m.per_column());
    j["per_pair"] = opt(m.per_pair());
    j["per_vector"] = opt(m.per_vector());
    j["units_correct"] = m.units_correct;
    j["units_total"] = m.units_total;
    j["length_mismatches"] = m.length_mismatches;
    return j;
}

Json bbox_json(const std::optional<BBoxScores>& b) {
    if (!b) return nullptr;
    Json j;
    j["recall"] = opt(b->recall);
    j["iou"] = opt(b->iou);
    return j;
}

std::string fmt(std::optional<double> v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *v);
    return buf;
}

std::string pad(std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
}

} // namespace

Json to_json(const EvalReport& r) {
    Json j;
    Json docs = Json::array();
    for (const auto& d : r.documents) {
        Json dj;
        dj["doc_id"] = d.doc_id;
        dj["teds"] = opt(d.teds);
        dj["text_truncation"] = prf_json(d.text_truncation);
        dj["association"] = prf_json(d.association);
        dj["table_merge"] = merge_json(d.table_merge);
        dj["evidence"] = bbox_json(d.evidence);
        docs.push_back(std::move(dj));
    }
    j["documents"] = std::move(docs);
    Json agg;
    agg["mean_teds"] = opt(r.mean_teds);
    agg["text_truncation"] = prf_json(r.text_truncation);
    agg["association"] = prf_json(r.association);
    agg["table_merge"] = merge_json(r.table_merge);
    agg["evidence"] = bbox_json(r.evidence);
    j["aggregate"] = std::move(agg);
    return j;
}

std::string to_table(const EvalReport& r) {
    std::size_t w = 8;
    for (const auto& d : r.documents) w = std::max(w, d.doc_id.size() + 2);
    std::string out = pad("document", w) +
                      "TEDS   text-P text-R text-F1 assoc-P assoc-R assoc-F1 merge-unit merge-col\n";
    auto row = [&](const std::string& name, std::optional<double> t, const PRF& tx, const PRF& as,
                   const MergeAccuracy& m) {
        out += pad(name, w) + pad(fmt(t), 7) + pad(fmt(tx.precision) + (tx.vacuous_precision ? "*" : ""), 7) +
               pad(fmt(tx.recall), 7) + pad(fmt(tx.f1), 8) +
               pad(fmt(as.precision) + (as.vacuous_precision ? "*" : ""), 8) + pad(fmt(as.recall), 8) +
               pad(fmt(as.f1), 9) + pad(fmt(m.per_unit()), 11) + fmt(m.per_column()) + "\n";
    };
    for (const auto& d : r.documents) row(d.doc_id, d.teds, d.text_truncation, d.association, d.table_merge);
    row("ALL", r.mean_teds, r.text_truncation, r.association, r.table_merge);
    out += "* precision of an empty prediction set\n";
    return out;
}

} // namespace docstruct
