#include "docstruct/html_table.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <optional>

#include "docstruct/error.hpp"
#include "docstruct/text_util.hpp"

namespace docstruct {

namespace {

constexpr std::size_t kNoCell = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kMaxSpan = 1000;

struct Tag {
    std::string name; // lower-case, without '/'
    bool closing = false;
    std::map<std::string, std::string> attrs;
};

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Parses the tag starting at html[pos] == '<'. Returns nullopt for comments,
// doctype and other non-element markup; pos is advanced past the markup.
std::optional<Tag> read_tag(std::string_view html, std::size_t& pos) {
    if (html.substr(pos, 4) == "<!--") {
        auto end = html.find("-->", pos + 4);
        pos = end == std::string_view::npos ? html.size() : end + 3;
        return std::nullopt;
    }
    auto close = html.find('>', pos);
    if (close == std::string_view::npos) {
        throw Error("table.TableHtmlUnparseable", "unterminated tag");
    }
    std::string_view body = html.substr(pos + 1, close - pos - 1);
    pos = close + 1;
    if (body.empty() || body[0] == '!' || body[0] == '?') return std::nullopt;

    Tag tag;
    std::size_t i = 0;
    if (body[0] == '/') {
        tag.closing = true;
        i = 1;
    }
    while (i < body.size() && (std::isalnum(static_cast<unsigned char>(body[i])) || body[i] == '-')) {
        tag.name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(body[i]))));
        ++i;
    }
    while (i < body.size()) {
        while (i < body.size() && (std::isspace(static_cast<unsigned char>(body[i])) || body[i] == '/')) ++i;
        std::string key;
        while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i])) && body[i] != '=' &&
               body[i] != '/') {
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(body[i]))));
            ++i;
        }
        std::string value;
        while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
        if (i < body.size() && body[i] == '=') {
            ++i;
            while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
            if (i < body.size() && (body[i] == '"' || body[i] == '\'')) {
                char q = body[i++];
                while (i < body.size() && body[i] != q) value.push_back(body[i++]);
                ++i;
            } else {
                while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) {
                    value.push_back(body[i++]);
                }
            }
        }
        if (!key.empty()) tag.attrs.emplace(std::move(key), std::move(value));
    }
    return tag;
}

std::size_t span_attr(const Tag& tag, const char* name) {
    auto it = tag.attrs.find(name);
    if (it == tag.attrs.end()) return 1;
    try {
        long v = std::stol(it->second);
        if (v < 1) return 1;
        return std::min<std::size_t>(static_cast<std::size_t>(v), kMaxSpan);
    } catch (...) {
        return 1;
    }
}

class GridBuilder {
public:
    void start_row() {
        ++row_;
        col_ = 0;
        ensure_row(row_);
        explicit_rows_ = std::max(explicit_rows_, row_ + 1);
    }

    void start_cell(bool header, std::size_t row_span, std::size_t col_span) {
        if (row_ == kNoCell) start_row();
        while (occupied(row_, col_)) ++col_;
        const std::size_t id = cells_.size();
        cells_.push_back(TableGrid::Cell{{}, header});
        raw_.resize(cells_.size());
        for (std::size_t r = row_; r < row_ + row_span; ++r) {
            ensure_row(r);
            for (std::size_t c = col_; c < col_ + col_span; ++c) set(r, c, id);
        }
        col_ += col_span;
        current_ = id;
    }

    void end_cell() { current_ = kNoCell; }
    bool in_cell() const { return current_ != kNoCell; }
    void text(std::string_view t) {
        if (current_ != kNoCell) raw_[current_] += t;
    }

    TableGrid finish() {
        TableGrid g;
        if (cells_.empty()) throw Error("table.TableHtmlUnparseable", "table has no cells");
        // rowspans running past the last <tr> are clipped
        occ_.resize(explicit_rows_);
        std::size_t width = 0;
        for (const auto& row : occ_) width = std::max(width, row.size());
        g.cells = std::move(cells_);
        for (std::size_t id = 0; id < g.cells.size(); ++id) {
            g.cells[id].text = text::collapse_whitespace(decode_html_entities(raw_[id]));
        }
        for (auto& row : occ_) {
            std::vector<std::size_t> out(width, kNoCell);
            std::copy(row.begin(), row.end(), out.begin());
            for (auto& slot : out) {
                if (slot == kNoCell) {
                    slot = g.cells.size();
                    g.cells.push_back(TableGrid::Cell{});
                }
            }
            g.slots.push_back(std::move(out));
        }
        g.canonicalize();
        if (!g.rectangular()) {
            throw Error("table.TableHtmlUnparseable", "overlapping row/column spans");
        }
        return g;
    }

private:
    void ensure_row(std::size_t r) {
        if (occ_.size() <= r) occ_.resize(r + 1);
    }
    bool occupied(std::size_t r, std::size_t c) const {
        return r < occ_.size() && c < occ_[r].size() && occ_[r][c] != kNoCell;
    }
    void set(std::size_t r, std::size_t c, std::size_t id) {
        if (occ_[r].size() <= c) occ_[r].resize(c + 1, kNoCell);
        if (occ_[r][c] == kNoCell) occ_[r][c] = id;
    }

    std::vector<std::vector<std::size_t>> occ_;
    std::vector<TableGrid::Cell> cells_;
    std::vector<std::string> raw_;
    std::size_t row_ = kNoCell;
    std::size_t col_ = 0;
    std::size_t current_ = kNoCell;
    std::size_t explicit_rows_ = 0;
};

} // namespace

std::vector<std::string> TableGrid::row_texts(std::size_t r) const {
    std::vector<std::string> out;
    out.reserve(columns());
    for (std::size_t c = 0; c < columns(); ++c) out.push_back(at(r, c).text);
    return out;
}

std::vector<TableGrid::Region> TableGrid::regions() const {
    std::vector<Region> out(cells.size());
    std::vector<bool> seen(cells.size(), false);
    std::vector<std::size_t> max_r(cells.size(), 0), max_c(cells.size(), 0);
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t c = 0; c < columns(); ++c) {
            const auto id = slots[r][c];
            if (!seen[id]) {
                seen[id] = true;
                out[id].row = r;
                out[id].col = c;
                max_r[id] = r;
                max_c[id] = c;
            }
            out[id].row = std::min(out[id].row, r);
            out[id].col = std::min(out[id].col, c);
            max_r[id] = std::max(max_r[id], r);
            max_c[id] = std::max(max_c[id], c);
        }
    }
    for (std::size_t id = 0; id < cells.size(); ++id) {
        if (!seen[id]) continue;
        out[id].row_span = max_r[id] - out[id].row + 1;
        out[id].col_span = max_c[id] - out[id].col + 1;
    }
    return out;
}

bool TableGrid::rectangular() const {
    for (const auto& row : slots) {
        if (row.size() != columns()) return false;
        for (auto id : row) {
            if (id >= cells.size()) return false;
        }
    }
    const auto regs = regions();
    std::vector<std::size_t> area(cells.size(), 0);
    for (const auto& row : slots) {
        for (auto id : row) ++area[id];
    }
    for (std::size_t id = 0; id < cells.size(); ++id) {
        if (area[id] == 0) continue;
        const auto& g = regs[id];
        if (area[id] != g.row_span * g.col_span) return false;
        for (std::size_t r = g.row; r < g.row + g.row_span; ++r) {
            for (std::size_t c = g.col; c < g.col + g.col_span; ++c) {
                if (slots[r][c] != id) return false;
            }
        }
    }
    return true;
}

void TableGrid::canonicalize() {
    std::vector<std::size_t> remap(cells.size(), kNoCell);
    std::vector<Cell> out;
    for (auto& row : slots) {
        for (auto& id : row) {
            if (remap[id] == kNoCell) {
                remap[id] = out.size();
                out.push_back(cells[id]);
            }
            id = remap[id];
        }
    }
    cells = std::move(out);
}

void TableGrid::erase_row(std::size_t r) {
    slots.erase(slots.begin() + static_cast<std::ptrdiff_t>(r));
    canonicalize();
}

TableGrid parse_table_html(std::string_view html) {
    GridBuilder b;
    int depth = 0;     // nesting depth of <table>
    bool seen_table = false;
    bool in_thead = false;
    std::size_t pos = 0;
    bool done = false;
    while (pos < html.size() && !done) {
        if (html[pos] != '<') {
            auto next = html.find('<', pos);
            if (next == std::string_view::npos) next = html.size();
            if (depth >= 1 || !seen_table) b.text(html.substr(pos, next - pos));
            pos = next;
            continue;
        }
        auto tag = read_tag(html, pos);
        if (!tag) continue;
        const auto& name = tag->name;
        if (name == "table") {
            if (!tag->closing) {
                seen_table = true;
                ++depth;
                if (depth > 1) b.text(" ");
            } else {
                --depth;
                if (depth <= 0) done = true;
            }
            continue;
        }
        if (depth > 1) {
            // nested table: flatten its text into the enclosing cell
            if (name == "td" || name == "th" || name == "br" || name == "tr") b.text(" ");
            continue;
        }
        if (name == "thead") {
            in_thead = !tag->closing;
        } else if (name == "tr") {
            if (!tag->closing) {
                b.end_cell();
                b.start_row();
            } else {
                b.end_cell();
            }
        } else if (name == "td" || name == "th") {
            if (!tag->closing) {
                b.end_cell();
                b.start_cell(name == "th" || in_thead, span_attr(*tag, "rowspan"),
                             span_attr(*tag, "colspan"));
            } else {
                b.end_cell();
            }
        } else if (name == "br" || name == "p" || name == "div" || name == "li") {
            b.text(" ");
        }
    }
    return b.finish();
}

std::string to_html(const TableGrid& grid) {
    std::string out = "<table>";
    const auto regs = grid.regions();
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        out += "<tr>";
        for (std::size_t c = 0; c < grid.columns(); ++c) {
            const auto id = grid.slots[r][c];
            const auto& reg = regs[id];
            if (reg.row != r || reg.col != c) continue;
            const auto& cell = grid.cells[id];
            const char* tag = cell.header ? "th" : "td";
            out += '<';
            out += tag;
            if (reg.row_span > 1) out += " rowspan=\"" + std::to_string(reg.row_span) + "\"";
            if (reg.col_span > 1) out += " colspan=\"" + std::to_string(reg.col_span) + "\"";
            out += '>';
            out += escape_html(cell.text);
            out += "</";
            out += tag;
            out += '>';
        }
        out += "</tr>";
    }
    out += "</table>";
    return out;
}

std::string rows_to_html(const TableGrid& grid, std::size_t first, std::size_t count) {
    TableGrid window;
    window.cells = grid.cells;
    for (std::size_t r = first; r < std::min(grid.rows(), first + count); ++r) {
        window.slots.push_back(grid.slots[r]);
    }
    window.canonicalize();
    std::string html = to_html(window);
    // strip the enclosing <table></table>
    return html.substr(7, html.size() - 15);
}

std::string decode_html_entities(std::string_view s) {
    static const std::map<std::string, char32_t, std::less<>> kNamed = {
        {"amp", U'&'},   {"lt", U'<'},     {"gt", U'>'},     {"quot", U'"'},
        {"apos", U'\''}, {"nbsp", U' '},   {"ndash", 0x2013}, {"mdash", 0x2014},
        {"hellip", 0x2026}, {"deg", 0x00B0}, {"plusmn", 0x00B1}, {"times", 0x00D7},
    };
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        auto semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back('&');
            continue;
        }
        std::string_view ent = s.substr(i + 1, semi - i - 1);
        std::optional<char32_t> cp;
        if (!ent.empty() && ent[0] == '#') {
            try {
                unsigned long v = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                                      ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                                      : std::stoul(std::string(ent.substr(1)));
                if (v > 0 && v <= 0x10FFFF) cp = static_cast<char32_t>(v);
            } catch (...) {
            }
        } else if (auto it = kNamed.find(ent); it != kNamed.end()) {
            cp = it->second;
        }
        if (!cp) {
            out.push_back('&');
            continue;
        }
        append_utf8(out, *cp);
        i = semi;
    }
    return out;
}

std::string escape_html(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

} // namespace docstruct
