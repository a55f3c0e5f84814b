#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gandse {

/// Flat `key = value` text. `#` starts a comment, blank lines are skipped, and keys keep
/// their file order. Sections are expressed as dotted key prefixes (`train.epochs`).
class KvText {
public:
    struct Entry {
        std::string key;
        std::string value;
        int line = 0;
    };

    static KvText parse(std::istream& in);
    static KvText parse_file(const std::string& path);

    const std::vector<Entry>& entries() const { return entries_; }
    const Entry* find(std::string_view key) const;
    bool contains(std::string_view key) const { return find(key) != nullptr; }

    /// Required lookups; throw ParseError naming the key when absent or malformed.
    const std::string& get(std::string_view key) const;
    double get_double(std::string_view key) const;
    std::int64_t get_int(std::string_view key) const;
    std::vector<std::int64_t> get_int_list(std::string_view key) const;

    void add(std::string key, std::string value) { entries_.push_back({std::move(key), std::move(value), 0}); }

private:
    std::vector<Entry> entries_;
};

/// Shortest text that parses back to the same double.
std::string format_double(double value);

double parse_double(std::string_view text, std::string_view what, int line = 0);
std::int64_t parse_int(std::string_view text, std::string_view what, int line = 0);
std::uint64_t parse_uint(std::string_view text, std::string_view what, int line = 0);
std::vector<std::int64_t> parse_int_list(std::string_view text, std::string_view what, int line = 0);

std::string_view trim(std::string_view s);

}  // namespace gandse
