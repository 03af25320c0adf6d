#include "cohomfield/kvfile.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cohomfield {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

const KvEntry* KvSection::find(const std::string& key) const {
    for (const auto& e : entries)
        if (e.key == key) return &e;
    return nullptr;
}

std::string KvSection::get_string(const std::string& key) const {
    const KvEntry* e = find(key);
    if (!e) throw ParseError("section [" + name + "] missing key '" + key + "'", line);
    e->used = true;
    std::string v = e->value;
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    return v;
}

double KvSection::get_number(const std::string& key) const {
    const KvEntry* e = find(key);
    if (!e) throw ParseError("section [" + name + "] missing key '" + key + "'", line);
    e->used = true;
    char* end = nullptr;
    const double v = std::strtod(e->value.c_str(), &end);
    if (end == e->value.c_str() || trim(end) != "")
        throw ParseError("key '" + key + "' is not a number", e->line);
    return v;
}

bool KvSection::get_bool(const std::string& key) const {
    const KvEntry* e = find(key);
    if (!e) throw ParseError("section [" + name + "] missing key '" + key + "'", line);
    e->used = true;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    throw ParseError("key '" + key + "' is not a boolean", e->line);
}

std::vector<double> KvSection::get_numbers(const std::string& key, std::size_t count) const {
    const KvEntry* e = find(key);
    if (!e) throw ParseError("section [" + name + "] missing key '" + key + "'", line);
    e->used = true;
    std::vector<double> out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str()) throw ParseError("key '" + key + "' has a malformed number", e->line);
        out.push_back(v);
    }
    if (out.size() != count)
        throw ParseError("key '" + key + "' expects " + std::to_string(count) + " numbers", e->line);
    return out;
}

void KvFile::reject_unused() const {
    for (const auto& s : sections)
        for (const auto& e : s.entries)
            if (!e.used)
                throw ParseError("unknown key '" + e.key + "' in section [" + s.name + "]", e.line);
}

KvFile parse_kv(const std::string& text) {
    KvFile file;
    std::stringstream ss(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", lineno);
            file.sections.push_back({trim(line.substr(1, line.size() - 2)), lineno, {}});
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
        if (file.sections.empty()) throw ParseError("key outside any section", lineno);
        KvEntry e;
        e.key = trim(line.substr(0, eq));
        e.value = trim(line.substr(eq + 1));
        e.line = lineno;
        if (e.key.empty()) throw ParseError("empty key", lineno);
        file.sections.back().entries.push_back(std::move(e));
    }
    return file;
}

KvFile load_kv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path, 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_kv(ss.str());
}

} // namespace cohomfield
