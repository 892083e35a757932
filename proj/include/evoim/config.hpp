#pragma once

#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace evoim {

// `key = value` lines, '#' comments, blank lines ignored.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in) {
        KeyValueConfig cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            lineno++;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            auto eq = line.find('=');
            std::string key = trim(eq == std::string::npos ? line : line.substr(0, eq));
            if (key.empty()) {
                if (!trim(line).empty())
                    throw std::invalid_argument("config line " + std::to_string(lineno) + ": missing key");
                continue;
            }
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
            cfg.values_[key] = trim(line.substr(eq + 1));
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (...) {
            throw std::invalid_argument("config: key '" + key + "' is not a number: " + it->second);
        }
    }

    int64_t get_int(const std::string& key, int64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stoll(it->second);
        } catch (...) {
            throw std::invalid_argument("config: key '" + key + "' is not an integer: " + it->second);
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1" || it->second == "on") return true;
        if (it->second == "false" || it->second == "0" || it->second == "off") return false;
        throw std::invalid_argument("config: key '" + key + "' is not a boolean: " + it->second);
    }

    // Comma-separated values; "CxN" expands to N copies of C.
    std::vector<int64_t> get_int_list(const std::string& key, const std::vector<int64_t>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<int64_t> out;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            auto x = tok.find('x');
            try {
                if (x != std::string::npos) {
                    int64_t val = std::stoll(tok.substr(0, x));
                    int64_t reps = std::stoll(tok.substr(x + 1));
                    for (int64_t i = 0; i < reps; ++i) out.push_back(val);
                } else {
                    out.push_back(std::stoll(tok));
                }
            } catch (...) {
                throw std::invalid_argument("config: bad list entry '" + tok + "' for key '" + key + "'");
            }
        }
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key, const std::vector<std::string>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::string> out;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty()) out.push_back(tok);
        }
        return out;
    }

    const std::map<std::string, std::string>& raw() const { return values_; }

private:
    static std::string trim(std::string s) {
        size_t a = s.find_first_not_of(" \t\r");
        size_t b = s.find_last_not_of(" \t\r");
        if (a == std::string::npos) return "";
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::string> values_;
};

}  // namespace evoim
