#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace docstruct {

enum class ElementType {
    title,
    text,
    image,
    table,
    image_caption,
    table_caption,
    image_footnote,
    table_footnote,
    page_header,
    page_footer,
    formula,
    other,
};

inline constexpr std::array<ElementType, 12> kAllElementTypes = {
    ElementType::title,          ElementType::text,           ElementType::image,
    ElementType::table,          ElementType::image_caption,  ElementType::table_caption,
    ElementType::image_footnote, ElementType::table_footnote, ElementType::page_header,
    ElementType::page_footer,    ElementType::formula,        ElementType::other,
};

std::string_view to_string(ElementType t);
std::optional<ElementType> element_type_from_string(std::string_view s);

bool is_visual(ElementType t);          // image, table
bool is_visual_annotation(ElementType t); // captions and footnotes
bool is_independent(ElementType t);     // page header / footer

/// The visual type an annotation may be attached to (image for
/// image_caption/image_footnote, table for table_caption/table_footnote).
std::optional<ElementType> annotation_target(ElementType t);

enum class CoordUnit { pixel, normalized };

std::string_view to_string(CoordUnit u);
std::optional<CoordUnit> coord_unit_from_string(std::string_view s);

struct BBox {
    double x0 = 0;
    double y0 = 0;
    double x1 = 0;
    double y1 = 0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool valid() const { return x0 < x1 && y0 < y1; }

    bool operator==(const BBox&) const = default;
};

struct CanonicalElement {
    std::size_t idx = 0;
    ElementType etype = ElementType::other;
    std::string content;
    std::size_t page = 0;
    BBox bbox;
    std::optional<std::string> table_html;
    std::optional<std::string> asset_ref;

    bool operator==(const CanonicalElement&) const = default;
};

struct CanonicalDocument {
    std::string doc_id;
    std::size_t page_count = 1;
    CoordUnit coord_unit = CoordUnit::pixel;
    std::vector<CanonicalElement> elements;
    std::string source_schema;

    /// Position of the element with the given idx, or nullopt.
    std::optional<std::size_t> position_of(std::size_t idx) const;
    const CanonicalElement* find(std::size_t idx) const;
    CanonicalElement* find(std::size_t idx);

    bool operator==(const CanonicalDocument&) const = default;
};

struct PageBox {
    std::size_t page = 0;
    BBox bbox;

    bool operator==(const PageBox&) const = default;
};

} // namespace docstruct
