#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "docstruct/json_fwd.hpp"
#include "docstruct/types.hpp"

namespace docstruct {

/// Label-mapping profile for one OCR model's output. Profiles are loaded
/// from JSON files (see profiles/ and README "Profile files").
struct Profile {
    enum class BBoxFormat { xyxy, xywh };

    std::string name;
    std::string description;
    bool best_effort = false;
    CoordUnit coord_unit = CoordUnit::pixel;
    BBoxFormat bbox_format = BBoxFormat::xyxy;
    long page_base = 0;
    std::string blocks_key = "blocks";

    // Canonical field -> candidate raw keys, first present wins.
    std::vector<std::string> type_keys{"type"};
    std::vector<std::string> content_keys{"content"};
    std::vector<std::string> page_keys{"page"};
    std::vector<std::string> bbox_keys{"bbox"};
    std::vector<std::string> table_html_keys{"table_html"};
    std::vector<std::string> asset_ref_keys{"asset_ref"};

    std::map<std::string, ElementType> labels;
    std::vector<std::string> drop_labels;
};

Profile profile_from_json(const Json& j);
Profile load_profile_file(const std::filesystem::path& path);

class ProfileRegistry {
public:
    ProfileRegistry() = default;

    /// Loads every *.json file in dir as a profile.
    static ProfileRegistry from_directory(const std::filesystem::path& dir);

    void add(Profile p);
    /// Throws ingest.SchemaUnknown when name is not registered.
    const Profile& get(const std::string& name) const;
    bool contains(const std::string& name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, Profile> profiles_;
};

struct NormalizationReport {
    struct Drop {
        std::size_t source_index;
        std::string label;
    };

    std::size_t source_blocks = 0;
    std::size_t emitted = 0;
    std::vector<Drop> dropped;
    std::map<std::string, std::size_t> unknown_labels;
    bool best_effort_profile = false;
};

struct NormalizeResult {
    CanonicalDocument doc;
    NormalizationReport report;
};

/// Maps a raw OCR JSON tree (an array of blocks, or an object holding the
/// block array under the profile's blocks_key plus optional doc_id /
/// page_count / coord_unit) to a canonical document.
///
/// Errors: ingest.MalformedInput, ingest.BBoxInvalid.
NormalizeResult normalize_elements(const Json& raw_doc, const Profile& profile,
                                   const std::string& doc_id = "document");

struct Violation {
    enum class Kind {
        NonMonotoneIdx,
        NonMonotonePage,
        PageOutOfRange,
        BBoxInvalid,
        TableWithoutHtml,
        HtmlOnNonTable,
    };

    Kind kind;
    std::size_t idx;
    std::string message;
};

std::string_view to_string(Violation::Kind k);

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Never throws; every invariant violation is listed with its element idx.
ValidationReport validate_document(const CanonicalDocument& doc);

Json to_json(const CanonicalElement& e);
Json to_json(const CanonicalDocument& doc);
Json to_json(const NormalizationReport& r);
CanonicalElement element_from_json(const Json& j);
/// Throws ingest.MalformedInput on schema errors.
CanonicalDocument document_from_json(const Json& j);

/// True when j looks like a canonical document rather than raw OCR output.
bool is_canonical_json(const Json& j);

Json to_json(const BBox& b);
BBox bbox_from_json(const Json& j);

} // namespace docstruct
