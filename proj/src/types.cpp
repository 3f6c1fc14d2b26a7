#include "docstruct/types.hpp"

#include <algorithm>

namespace docstruct {

namespace {

constexpr std::array<std::string_view, 12> kTypeNames = {
    "title",          "text",           "image",       "table",
    "image_caption",  "table_caption",  "image_footnote", "table_footnote",
    "page_header",    "page_footer",    "formula",     "other",
};

} // namespace

std::string_view to_string(ElementType t) {
    return kTypeNames[static_cast<std::size_t>(t)];
}

std::optional<ElementType> element_type_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
        if (kTypeNames[i] == s) return kAllElementTypes[i];
    }
    return std::nullopt;
}

bool is_visual(ElementType t) {
    return t == ElementType::image || t == ElementType::table;
}

bool is_visual_annotation(ElementType t) {
    return annotation_target(t).has_value();
}

bool is_independent(ElementType t) {
    return t == ElementType::page_header || t == ElementType::page_footer;
}

std::optional<ElementType> annotation_target(ElementType t) {
    switch (t) {
    case ElementType::image_caption:
    case ElementType::image_footnote:
        return ElementType::image;
    case ElementType::table_caption:
    case ElementType::table_footnote:
        return ElementType::table;
    default:
        return std::nullopt;
    }
}

std::string_view to_string(CoordUnit u) {
    return u == CoordUnit::pixel ? "pixel" : "normalized";
}

std::optional<CoordUnit> coord_unit_from_string(std::string_view s) {
    if (s == "pixel") return CoordUnit::pixel;
    if (s == "normalized") return CoordUnit::normalized;
    return std::nullopt;
}

std::optional<std::size_t> CanonicalDocument::position_of(std::size_t idx) const {
    // elements are sorted by idx in a valid document; fall back to a scan otherwise
    auto it = std::lower_bound(elements.begin(), elements.end(), idx,
                               [](const CanonicalElement& e, std::size_t v) { return e.idx < v; });
    if (it != elements.end() && it->idx == idx) {
        return static_cast<std::size_t>(it - elements.begin());
    }
    for (std::size_t i = 0; i < elements.size(); ++i) {
        if (elements[i].idx == idx) return i;
    }
    return std::nullopt;
}

const CanonicalElement* CanonicalDocument::find(std::size_t idx) const {
    auto pos = position_of(idx);
    return pos ? &elements[*pos] : nullptr;
}

CanonicalElement* CanonicalDocument::find(std::size_t idx) {
    auto pos = position_of(idx);
    return pos ? &elements[*pos] : nullptr;
}

} // namespace docstruct
