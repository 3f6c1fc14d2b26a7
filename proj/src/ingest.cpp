#include "docstruct/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "docstruct/error.hpp"

namespace docstruct {

namespace {

std::vector<std::string> keys_from(const Json& j) {
    if (j.is_string()) return {j.get<std::string>()};
    if (j.is_array()) {
        std::vector<std::string> out;
        for (const auto& k : j) out.push_back(k.get<std::string>());
        return out;
    }
    throw Error("ingest.ProfileInvalid", "field mapping must be a string or an array of strings");
}

const Json* first_present(const Json& block, const std::vector<std::string>& keys) {
    for (const auto& k : keys) {
        auto it = block.find(k);
        if (it != block.end() && !it->is_null()) return &*it;
    }
    return nullptr;
}

std::string describe(std::size_t source_index, const std::string& what) {
    return "block " + std::to_string(source_index) + ": " + what;
}

BBox read_bbox(const Json& raw, Profile::BBoxFormat fmt, std::size_t source_index) {
    if (!raw.is_array() || raw.size() != 4) {
        throw Error("ingest.BBoxInvalid", describe(source_index, "bbox must be an array of 4 numbers"));
    }
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (!raw[i].is_number()) {
            throw Error("ingest.BBoxInvalid", describe(source_index, "bbox holds a non-numeric value"));
        }
        v[i] = raw[i].get<double>();
        if (!std::isfinite(v[i])) {
            throw Error("ingest.BBoxInvalid", describe(source_index, "bbox holds a non-finite value"));
        }
    }
    BBox b = fmt == Profile::BBoxFormat::xyxy ? BBox{v[0], v[1], v[2], v[3]}
                                              : BBox{v[0], v[1], v[0] + v[2], v[1] + v[3]};
    if (!b.valid()) {
        throw Error("ingest.BBoxInvalid", describe(source_index, "bbox is inverted or empty"));
    }
    return b;
}

std::string content_string(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        // some OCR models emit captions as a list of lines
        std::string out;
        for (const auto& part : v) {
            if (!part.is_string()) continue;
            if (!out.empty()) out += ' ';
            out += part.get<std::string>();
        }
        return out;
    }
    if (v.is_number()) return v.dump();
    return {};
}

} // namespace

Profile profile_from_json(const Json& j) {
    if (!j.is_object()) throw Error("ingest.ProfileInvalid", "profile must be a JSON object");
    Profile p;
    p.name = j.at("name").get<std::string>();
    p.description = j.value("description", "");
    p.best_effort = j.value("best_effort", false);
    if (j.contains("coord_unit")) {
        auto u = coord_unit_from_string(j["coord_unit"].get<std::string>());
        if (!u) throw Error("ingest.ProfileInvalid", "unknown coord_unit in profile " + p.name);
        p.coord_unit = *u;
    }
    auto fmt = j.value("bbox_format", std::string("xyxy"));
    if (fmt == "xyxy") p.bbox_format = Profile::BBoxFormat::xyxy;
    else if (fmt == "xywh") p.bbox_format = Profile::BBoxFormat::xywh;
    else throw Error("ingest.ProfileInvalid", "unknown bbox_format '" + fmt + "'");
    p.page_base = j.value("page_base", 0L);
    p.blocks_key = j.value("blocks_key", std::string("blocks"));

    if (j.contains("fields")) {
        const auto& f = j["fields"];
        if (f.contains("type")) p.type_keys = keys_from(f["type"]);
        if (f.contains("content")) p.content_keys = keys_from(f["content"]);
        if (f.contains("page")) p.page_keys = keys_from(f["page"]);
        if (f.contains("bbox")) p.bbox_keys = keys_from(f["bbox"]);
        if (f.contains("table_html")) p.table_html_keys = keys_from(f["table_html"]);
        if (f.contains("asset_ref")) p.asset_ref_keys = keys_from(f["asset_ref"]);
    }
    for (const auto& [raw, canon] : j.at("labels").items()) {
        auto t = element_type_from_string(canon.get<std::string>());
        if (!t) {
            throw Error("ingest.ProfileInvalid",
                        "profile " + p.name + " maps '" + raw + "' to unknown type '" +
                            canon.get<std::string>() + "'");
        }
        p.labels.emplace(raw, *t);
    }
    if (j.contains("drop")) p.drop_labels = keys_from(j["drop"]);
    return p;
}

Profile load_profile_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("ingest.SchemaUnknown", "cannot open profile file " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error("ingest.ProfileInvalid", path.string() + ": " + e.what());
    }
    return profile_from_json(j);
}

ProfileRegistry ProfileRegistry::from_directory(const std::filesystem::path& dir) {
    ProfileRegistry reg;
    if (!std::filesystem::is_directory(dir)) return reg;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) reg.add(load_profile_file(f));
    return reg;
}

void ProfileRegistry::add(Profile p) {
    auto name = p.name;
    profiles_.insert_or_assign(std::move(name), std::move(p));
}

const Profile& ProfileRegistry::get(const std::string& name) const {
    auto it = profiles_.find(name);
    if (it == profiles_.end()) {
        std::string known;
        for (const auto& [n, _] : profiles_) known += (known.empty() ? "" : ", ") + n;
        throw Error("ingest.SchemaUnknown",
                    "no profile named '" + name + "' (registered: " + known + ")");
    }
    return it->second;
}

bool ProfileRegistry::contains(const std::string& name) const {
    return profiles_.count(name) != 0;
}

std::vector<std::string> ProfileRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [n, _] : profiles_) out.push_back(n);
    return out;
}

NormalizeResult normalize_elements(const Json& raw_doc, const Profile& profile,
                                   const std::string& doc_id) {
    NormalizeResult result;
    auto& doc = result.doc;
    auto& report = result.report;
    doc.doc_id = doc_id;
    doc.source_schema = profile.name;
    doc.coord_unit = profile.coord_unit;
    report.best_effort_profile = profile.best_effort;

    const Json* blocks = nullptr;
    std::optional<std::size_t> declared_pages;
    if (raw_doc.is_array()) {
        blocks = &raw_doc;
    } else if (raw_doc.is_object()) {
        auto it = raw_doc.find(profile.blocks_key);
        if (it == raw_doc.end() || !it->is_array()) {
            throw Error("ingest.MalformedInput",
                        "raw document object has no '" + profile.blocks_key + "' array");
        }
        blocks = &*it;
        if (raw_doc.contains("doc_id") && raw_doc["doc_id"].is_string()) {
            doc.doc_id = raw_doc["doc_id"].get<std::string>();
        }
        if (raw_doc.contains("page_count")) {
            const auto& pc = raw_doc["page_count"];
            if (!pc.is_number_integer() || pc.get<long long>() <= 0) {
                throw Error("ingest.MalformedInput", "page_count must be a positive integer");
            }
            declared_pages = pc.get<std::size_t>();
        }
        if (raw_doc.contains("coord_unit")) {
            auto u = coord_unit_from_string(raw_doc["coord_unit"].get<std::string>());
            if (!u) throw Error("ingest.MalformedInput", "unknown coord_unit");
            doc.coord_unit = *u;
        }
    } else {
        throw Error("ingest.MalformedInput", "raw document must be a JSON array or object");
    }

    report.source_blocks = blocks->size();
    std::size_t max_page = 0;
    for (std::size_t i = 0; i < blocks->size(); ++i) {
        const Json& block = (*blocks)[i];
        if (!block.is_object()) {
            throw Error("ingest.MalformedInput", describe(i, "block is not an object"));
        }
        const Json* label_v = first_present(block, profile.type_keys);
        if (!label_v || !label_v->is_string()) {
            throw Error("ingest.MalformedInput", describe(i, "missing type label"));
        }
        const auto label = label_v->get<std::string>();
        if (std::find(profile.drop_labels.begin(), profile.drop_labels.end(), label) !=
            profile.drop_labels.end()) {
            report.dropped.push_back({i, label});
            continue;
        }

        CanonicalElement e;
        e.idx = doc.elements.size();
        if (auto it = profile.labels.find(label); it != profile.labels.end()) {
            e.etype = it->second;
        } else {
            e.etype = ElementType::other;
            ++report.unknown_labels[label];
        }

        const Json* page_v = first_present(block, profile.page_keys);
        if (!page_v || !page_v->is_number_integer()) {
            throw Error("ingest.MalformedInput", describe(i, "missing or non-integer page"));
        }
        const long long page = page_v->get<long long>() - profile.page_base;
        if (page < 0) throw Error("ingest.MalformedInput", describe(i, "page below page_base"));
        e.page = static_cast<std::size_t>(page);
        max_page = std::max(max_page, e.page);

        const Json* bbox_v = first_present(block, profile.bbox_keys);
        if (!bbox_v) throw Error("ingest.MalformedInput", describe(i, "missing bbox"));
        e.bbox = read_bbox(*bbox_v, profile.bbox_format, i);

        if (const Json* c = first_present(block, profile.content_keys)) e.content = content_string(*c);

        if (e.etype == ElementType::table) {
            const Json* html = first_present(block, profile.table_html_keys);
            if (!html || !html->is_string()) {
                throw Error("ingest.MalformedInput", describe(i, "table block without HTML body"));
            }
            e.table_html = html->get<std::string>();
        }
        if (const Json* a = first_present(block, profile.asset_ref_keys); a && a->is_string()) {
            e.asset_ref = a->get<std::string>();
        }
        doc.elements.push_back(std::move(e));
    }

    doc.page_count = declared_pages.value_or(doc.elements.empty() ? 1 : max_page + 1);
    report.emitted = doc.elements.size();
    return result;
}

std::string_view to_string(Violation::Kind k) {
    switch (k) {
    case Violation::Kind::NonMonotoneIdx: return "NonMonotoneIdx";
    case Violation::Kind::NonMonotonePage: return "NonMonotonePage";
    case Violation::Kind::PageOutOfRange: return "PageOutOfRange";
    case Violation::Kind::BBoxInvalid: return "BBoxInvalid";
    case Violation::Kind::TableWithoutHtml: return "TableWithoutHtml";
    case Violation::Kind::HtmlOnNonTable: return "HtmlOnNonTable";
    }
    return "Unknown";
}

ValidationReport validate_document(const CanonicalDocument& doc) {
    ValidationReport r;
    auto add = [&](Violation::Kind k, std::size_t idx, std::string msg) {
        r.violations.push_back({k, idx, std::move(msg)});
    };
    for (std::size_t i = 0; i < doc.elements.size(); ++i) {
        const auto& e = doc.elements[i];
        if (i > 0) {
            const auto& prev = doc.elements[i - 1];
            if (e.idx <= prev.idx) {
                add(Violation::Kind::NonMonotoneIdx, e.idx,
                    "idx " + std::to_string(e.idx) + " does not follow " + std::to_string(prev.idx));
            }
            if (e.page < prev.page) {
                add(Violation::Kind::NonMonotonePage, e.idx,
                    "page " + std::to_string(e.page) + " after page " + std::to_string(prev.page));
            }
        }
        if (e.page >= doc.page_count) {
            add(Violation::Kind::PageOutOfRange, e.idx,
                "page " + std::to_string(e.page) + " >= page_count " +
                    std::to_string(doc.page_count));
        }
        if (!e.bbox.valid()) add(Violation::Kind::BBoxInvalid, e.idx, "bbox is inverted or empty");
        if (e.etype == ElementType::table && !e.table_html) {
            add(Violation::Kind::TableWithoutHtml, e.idx, "table element has no table_html");
        }
        if (e.etype != ElementType::table && e.table_html) {
            add(Violation::Kind::HtmlOnNonTable, e.idx, "table_html on a non-table element");
        }
    }
    return r;
}

Json to_json(const BBox& b) { return Json::array({b.x0, b.y0, b.x1, b.y1}); }

BBox bbox_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 4) {
        throw Error("ingest.MalformedInput", "bbox must be an array of 4 numbers");
    }
    for (const auto& v : j) {
        if (!v.is_number()) throw Error("ingest.MalformedInput", "bbox must hold numbers");
    }
    return BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

Json to_json(const CanonicalElement& e) {
    Json j;
    j["idx"] = e.idx;
    j["etype"] = std::string(to_string(e.etype));
    j["content"] = e.content;
    j["page"] = e.page;
    j["bbox"] = to_json(e.bbox);
    if (e.table_html) j["table_html"] = *e.table_html;
    if (e.asset_ref) j["asset_ref"] = *e.asset_ref;
    return j;
}

Json to_json(const CanonicalDocument& doc) {
    Json j;
    j["doc_id"] = doc.doc_id;
    j["page_count"] = doc.page_count;
    j["coord_unit"] = std::string(to_string(doc.coord_unit));
    j["source_schema"] = doc.source_schema;
    Json elements = Json::array();
    for (const auto& e : doc.elements) elements.push_back(to_json(e));
    j["elements"] = std::move(elements);
    return j;
}

Json to_json(const NormalizationReport& r) {
    Json j;
    j["source_blocks"] = r.source_blocks;
    j["emitted"] = r.emitted;
    Json dropped = Json::array();
    for (const auto& d : r.dropped) {
        dropped.push_back(Json{{"source_index", d.source_index}, {"label", d.label}});
    }
    j["dropped"] = std::move(dropped);
    Json unknown = Json::object();
    for (const auto& [label, n] : r.unknown_labels) unknown[label] = n;
    j["unknown_labels"] = std::move(unknown);
    j["best_effort_profile"] = r.best_effort_profile;
    return j;
}

CanonicalElement element_from_json(const Json& j) {
    try {
        CanonicalElement e;
        e.idx = j.at("idx").get<std::size_t>();
        auto t = element_type_from_string(j.at("etype").get<std::string>());
        if (!t) throw Error("ingest.MalformedInput", "unknown etype '" + j["etype"].get<std::string>() + "'");
        e.etype = *t;
        e.content = j.value("content", std::string{});
        e.page = j.at("page").get<std::size_t>();
        e.bbox = bbox_from_json(j.at("bbox"));
        if (j.contains("table_html")) e.table_html = j["table_html"].get<std::string>();
        if (j.contains("asset_ref")) e.asset_ref = j["asset_ref"].get<std::string>();
        return e;
    } catch (const Json::exception& ex) {
        throw Error("ingest.MalformedInput", std::string("canonical element: ") + ex.what());
    }
}

CanonicalDocument document_from_json(const Json& j) {
    if (!j.is_object()) throw Error("ingest.MalformedInput", "canonical document must be an object");
    try {
        CanonicalDocument doc;
        doc.doc_id = j.at("doc_id").get<std::string>();
        doc.page_count = j.at("page_count").get<std::size_t>();
        auto u = coord_unit_from_string(j.at("coord_unit").get<std::string>());
        if (!u) throw Error("ingest.MalformedInput", "unknown coord_unit");
        doc.coord_unit = *u;
        doc.source_schema = j.value("source_schema", std::string{});
        for (const auto& e : j.at("elements")) doc.elements.push_back(element_from_json(e));
        return doc;
    } catch (const Json::exception& ex) {
        throw Error("ingest.MalformedInput", std::string("canonical document: ") + ex.what());
    }
}

bool is_canonical_json(const Json& j) {
    return j.is_object() && j.contains("elements") && j.contains("page_count") &&
           j.contains("coord_unit");
}

} // namespace docstruct
