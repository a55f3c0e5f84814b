#include "gandse/kv_text.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "gandse/error.hpp"

namespace gandse {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

KvText KvText::parse(std::istream& in) {
    KvText kv;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text = raw;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value', got '" + std::string(text) + "'", line);
        const auto key = trim(text.substr(0, eq));
        if (key.empty()) throw ParseError("empty key", line);
        if (kv.find(key) != nullptr) throw ParseError("duplicate key '" + std::string(key) + "'", line);
        kv.entries_.push_back({std::string(key), std::string(trim(text.substr(eq + 1))), line});
    }
    return kv;
}

KvText KvText::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return parse(in);
}

const KvText::Entry* KvText::find(std::string_view key) const {
    for (const auto& e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

const std::string& KvText::get(std::string_view key) const {
    const auto* e = find(key);
    if (e == nullptr) throw ParseError("missing key '" + std::string(key) + "'");
    return e->value;
}

double KvText::get_double(std::string_view key) const {
    const auto* e = find(key);
    if (e == nullptr) throw ParseError("missing key '" + std::string(key) + "'");
    return parse_double(e->value, key, e->line);
}

std::int64_t KvText::get_int(std::string_view key) const {
    const auto* e = find(key);
    if (e == nullptr) throw ParseError("missing key '" + std::string(key) + "'");
    return parse_int(e->value, key, e->line);
}

std::vector<std::int64_t> KvText::get_int_list(std::string_view key) const {
    const auto* e = find(key);
    if (e == nullptr) throw ParseError("missing key '" + std::string(key) + "'");
    return parse_int_list(e->value, key, e->line);
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what, int line) {
    text = trim(text);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ParseError(std::string(what) + ": not a number: '" + std::string(text) + "'", line);
    return value;
}

std::int64_t parse_int(std::string_view text, std::string_view what, int line) {
    text = trim(text);
    std::int64_t value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ParseError(std::string(what) + ": not an integer: '" + std::string(text) + "'", line);
    return value;
}

std::uint64_t parse_uint(std::string_view text, std::string_view what, int line) {
    text = trim(text);
    std::uint64_t value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ParseError(std::string(what) + ": not an unsigned integer: '" + std::string(text) + "'", line);
    return value;
}

std::vector<std::int64_t> parse_int_list(std::string_view text, std::string_view what, int line) {
    std::vector<std::int64_t> out;
    while (true) {
        const auto comma = text.find(',');
        out.push_back(parse_int(text.substr(0, comma), what, line));
        if (comma == std::string_view::npos) break;
        text = text.substr(comma + 1);
    }
    return out;
}

}  // namespace gandse
