#pragma once

#include "bst/tensor.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace bst {

/// Key/value tree file: one `key = value` per line, dotted keys for
/// nesting, `#` starts a comment, lists are whitespace separated and `|`
/// separates list-of-list entries.
class ConfigTree {
public:
    static ConfigTree parse_string(const std::string& text) {
        ConfigTree cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static ConfigTree parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open config " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str());
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw std::invalid_argument("missing config key: " + key);
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key) const { return to_double(get_string(key), key); }
    double get_double(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    Index get_index(const std::string& key) const {
        return static_cast<Index>(std::llround(to_double(get_string(key), key)));
    }
    Index get_index(const std::string& key, Index fallback) const {
        return has(key) ? get_index(key) : fallback;
    }

    std::vector<double> get_double_list(const std::string& key) const {
        std::vector<double> out;
        std::istringstream in(get_string(key));
        std::string tok;
        while (in >> tok) out.push_back(to_double(tok, key));
        if (out.empty()) throw std::invalid_argument("empty list for config key: " + key);
        return out;
    }

    std::vector<Index> get_index_list(const std::string& key) const {
        std::vector<Index> out;
        for (double v : get_double_list(key)) out.push_back(static_cast<Index>(std::llround(v)));
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key) const {
        std::vector<std::string> out;
        std::istringstream in(get_string(key));
        std::string tok;
        while (in >> tok) out.push_back(tok);
        if (out.empty()) throw std::invalid_argument("empty list for config key: " + key);
        return out;
    }

    /// `a b c | d e f` -> {{a,b,c},{d,e,f}}.
    std::vector<std::vector<Index>> get_index_list_of_lists(const std::string& key) const {
        std::vector<std::vector<Index>> out;
        std::string text = get_string(key);
        std::size_t start = 0;
        while (start <= text.size()) {
            const auto bar = text.find('|', start);
            const std::string part =
                text.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
            std::vector<Index> entry;
            std::istringstream in(part);
            std::string tok;
            while (in >> tok) entry.push_back(static_cast<Index>(std::llround(to_double(tok, key))));
            if (!entry.empty()) out.push_back(std::move(entry));
            if (bar == std::string::npos) break;
            start = bar + 1;
        }
        if (out.empty()) throw std::invalid_argument("empty list for config key: " + key);
        return out;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
    static std::string trim(const std::string& s) {
        const auto first = s.find_first_not_of(" \t\r");
        if (first == std::string::npos) return {};
        const auto last = s.find_last_not_of(" \t\r");
        return s.substr(first, last - first + 1);
    }

    static double to_double(const std::string& s, const std::string& key) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("config key " + key + ": cannot parse number '" + s + "'");
        }
    }

    std::map<std::string, std::string> values_;
};

}  // namespace bst
