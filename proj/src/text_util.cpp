#include "docstruct/text_util.hpp"

#include <cctype>

namespace docstruct::text {

namespace {

bool ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

} // namespace

std::string_view trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && ascii_space(s[b])) ++b;
    while (e > b && ascii_space(s[e - 1])) --e;
    // U+3000 ideographic space and U+00A0 no-break space
    while (true) {
        auto t = s.substr(b, e - b);
        if (starts_with(t, "　")) { b += 3; continue; }
        if (starts_with(t, " ")) { b += 2; continue; }
        if (ends_with(t, "　")) { e -= 3; continue; }
        if (ends_with(t, " ")) { e -= 2; continue; }
        break;
    }
    while (b < e && ascii_space(s[b])) ++b;
    while (e > b && ascii_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    for (char c : trim(s)) {
        if (ascii_space(c)) {
            pending = true;
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

char32_t decode_next(std::string_view s, std::size_t& pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    auto cont = [&](std::size_t off) -> int {
        if (pos + off >= s.size()) return -1;
        auto b = static_cast<unsigned char>(s[pos + off]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else {
        ++pos;
        return 0xFFFD;
    }
    for (int i = 1; i < len; ++i) {
        int c = cont(i);
        if (c < 0) {
            ++pos;
            return 0xFFFD;
        }
        cp = (cp << 6) | static_cast<char32_t>(c);
    }
    pos += len;
    return cp;
}

std::size_t last_codepoint_start(std::string_view s) {
    if (s.empty()) return s.size();
    std::size_t i = s.size() - 1;
    std::size_t steps = 0;
    while (i > 0 && steps < 3 && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) {
        --i;
        ++steps;
    }
    return i;
}

char32_t first_codepoint(std::string_view s) {
    if (s.empty()) return 0;
    std::size_t pos = 0;
    return decode_next(s, pos);
}

char32_t last_codepoint(std::string_view s) {
    if (s.empty()) return 0;
    std::size_t pos = last_codepoint_start(s);
    return decode_next(s, pos);
}

std::size_t codepoint_count(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t pos = 0; pos < s.size(); ++n) decode_next(s, pos);
    return n;
}

std::string take_front(std::string_view s, std::size_t max_cp) {
    std::size_t pos = 0;
    for (std::size_t n = 0; n < max_cp && pos < s.size(); ++n) decode_next(s, pos);
    return std::string(s.substr(0, pos));
}

std::string take_back(std::string_view s, std::size_t max_cp) {
    const std::size_t total = codepoint_count(s);
    if (total <= max_cp) return std::string(s);
    std::size_t pos = 0;
    for (std::size_t n = 0; n < total - max_cp; ++n) decode_next(s, pos);
    return std::string(s.substr(pos));
}

bool is_cjk(char32_t c) {
    return (c >= 0x4E00 && c <= 0x9FFF) ||   // unified ideographs
           (c >= 0x3400 && c <= 0x4DBF) ||   // extension A
           (c >= 0x3000 && c <= 0x303F) ||   // CJK punctuation
           (c >= 0x3040 && c <= 0x30FF) ||   // kana
           (c >= 0xAC00 && c <= 0xD7AF) ||   // hangul
           (c >= 0xFF00 && c <= 0xFFEF) ||   // full-width forms
           (c >= 0x20000 && c <= 0x2FA1F);
}

bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
           c == 0x00A0 || c == 0x3000;
}

bool is_ascii_upper(char32_t c) { return c >= U'A' && c <= U'Z'; }
bool is_ascii_lower(char32_t c) { return c >= U'a' && c <= U'z'; }

bool is_letter(char32_t c) {
    if (is_ascii_upper(c) || is_ascii_lower(c)) return true;
    return (c >= 0x00C0 && c <= 0x024F && c != 0x00D7 && c != 0x00F7);
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string join_fragments(std::string_view tail, std::string_view head) {
    if (tail.empty()) return std::string(head);
    if (head.empty()) return std::string(tail);

    const char32_t last = last_codepoint(tail);
    const char32_t first = first_codepoint(head);
    if (is_space(last) || is_space(first)) return std::string(tail) + std::string(head);

    if (last == U'-') {
        std::string_view before = tail.substr(0, tail.size() - 1);
        if (!before.empty() && is_letter(last_codepoint(before))) {
            return std::string(before) + std::string(head);
        }
        return std::string(tail) + std::string(head);
    }
    if (last == U'/') return std::string(tail) + std::string(head);
    if (is_cjk(last) || is_cjk(first)) return std::string(tail) + std::string(head);
    return std::string(tail) + " " + std::string(head);
}

std::string strip_join_chars(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (ascii_space(c) || c == '-') continue;
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto nl = s.find('\n', start);
        if (nl == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

} // namespace docstruct::text
