#pragma once

#include <string>
#include <vector>

#include "cohomfield/errors.hpp"

namespace cohomfield {

// Sectioned key/value text: `[section]` headers, `key = value` lines,
// `#` comments, blank lines ignored.  Values keep surrounding quotes stripped
// only through the typed getters below.
struct KvEntry {
    std::string key;
    std::string value;
    int line = 0;
    mutable bool used = false;
};

struct KvSection {
    std::string name;
    int line = 0;
    std::vector<KvEntry> entries;

    const KvEntry* find(const std::string& key) const;
    // Getters mark entries used; throws ParseError on missing/malformed.
    std::string get_string(const std::string& key) const;   // strips quotes
    double get_number(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<double> get_numbers(const std::string& key, std::size_t count) const;
    bool has(const std::string& key) const { return find(key) != nullptr; }
};

struct KvFile {
    std::vector<KvSection> sections;

    // Throws ParseError listing the first entry never consumed by a getter.
    void reject_unused() const;
};

KvFile parse_kv(const std::string& text);
KvFile load_kv(const std::string& path);

} // namespace cohomfield
