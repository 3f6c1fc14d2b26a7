#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace docstruct {

/// Rectangular grid model of an HTML table after rowspan/colspan expansion.
///
/// Every slot holds the id of the cell covering it; a spanning cell covers a
/// rectangular block of slots and is anchored at the block's top-left slot.
struct TableGrid {
    struct Cell {
        std::string text;
        bool header = false;

        bool operator==(const Cell&) const = default;
    };

    struct Region {
        std::size_t row = 0;
        std::size_t col = 0;
        std::size_t row_span = 0;
        std::size_t col_span = 0;
    };

    std::vector<Cell> cells;
    std::vector<std::vector<std::size_t>> slots;

    std::size_t rows() const { return slots.size(); }
    std::size_t columns() const { return slots.empty() ? 0 : slots.front().size(); }

    const Cell& at(std::size_t r, std::size_t c) const { return cells[slots[r][c]]; }

    /// Expanded text of one row, one entry per column.
    std::vector<std::string> row_texts(std::size_t r) const;

    /// Bounding block of every cell id; cells that cover no slot get a
    /// zero-span region.
    std::vector<Region> regions() const;

    /// True when every cell covers exactly a filled rectangle of slots.
    bool rectangular() const;

    /// Renumbers cells by first appearance in row-major order and drops
    /// cells that no longer cover any slot.
    void canonicalize();

    /// Removes one slot row; spanning cells shrink accordingly.
    void erase_row(std::size_t r);

    bool operator==(const TableGrid&) const = default;
};

/// Parses the first table in html. Throws Error("table.TableHtmlUnparseable")
/// when no cell can be recovered. Ragged rows are padded with empty cells.
TableGrid parse_table_html(std::string_view html);

/// Serializes with rowspan/colspan attributes; header cells become <th>.
std::string to_html(const TableGrid& grid);

/// Serializes rows [first, first + count) as a <tr>... fragment; spans are
/// clipped to the window.
std::string rows_to_html(const TableGrid& grid, std::size_t first, std::size_t count);

/// Decodes the common named entities and numeric character references.
std::string decode_html_entities(std::string_view s);
std::string escape_html(std::string_view s);

} // namespace docstruct
