#pragma once

// Key-value text files: one "key = value" per line, '#' starts a comment, dotted keys.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asnet/error.hpp"

namespace asnet {

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e;
}

inline bool parse_int(const std::string& s, long long& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

class KeyValueFile {
public:
    KeyValueFile() = default;

    static KeyValueFile parse(const std::string& text, const std::string& source = "<config>") {
        KeyValueFile kv;
        kv.source_ = source;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const std::string t = detail::trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw ParseError(source, lineno, "expected 'key = value'");
            std::string key = detail::trim(std::string_view(t).substr(0, eq));
            std::string value = detail::trim(std::string_view(t).substr(eq + 1));
            if (key.empty()) throw ParseError(source, lineno, "empty key");
            if (kv.values_.count(key)) throw ParseError(source, lineno, "duplicate key '" + key + "'");
            kv.lines_[key] = lineno;
            kv.values_[key] = std::move(value);
        }
        return kv;
    }

    static KeyValueFile load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot read config file " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path.string());
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = find(key);
        return it ? *it : fallback;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = find(key);
        if (!it) return fallback;
        double v = 0.0;
        if (!detail::parse_double(*it, v)) fail(key, "expected a number, got '" + *it + "'");
        return v;
    }

    int get_int(const std::string& key, int fallback) const {
        auto it = find(key);
        if (!it) return fallback;
        long long v = 0;
        if (!detail::parse_int(*it, v)) fail(key, "expected an integer, got '" + *it + "'");
        return static_cast<int>(v);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = find(key);
        if (!it) return fallback;
        if (*it == "true" || *it == "1" || *it == "on" || *it == "yes") return true;
        if (*it == "false" || *it == "0" || *it == "off" || *it == "no") return false;
        fail(key, "expected a boolean, got '" + *it + "'");
    }

    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const {
        auto it = find(key);
        if (!it) return fallback;
        std::vector<double> out;
        for (const auto& part : detail::split(*it, ',')) {
            double v = 0.0;
            if (!detail::parse_double(part, v)) fail(key, "expected a comma-separated number list");
            out.push_back(v);
        }
        return out;
    }

    /// Throws on any key that no getter has asked for.
    void reject_unknown() const {
        for (const auto& [key, value] : values_)
            if (!used_.count(key)) throw ParseError(source_, line_of(key), "unknown key '" + key + "'");
    }

    /// Canonical "key=value" lines in key order.
    std::string canonical() const {
        std::string out;
        for (const auto& [key, value] : values_) out += key + "=" + value + "\n";
        return out;
    }

    const std::string& source() const noexcept { return source_; }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ParseError(source_, line_of(key), key + ": " + what);
    }

private:
    const std::string* find(const std::string& key) const {
        used_.insert(key);
        auto it = values_.find(key);
        return it == values_.end() ? nullptr : &it->second;
    }

    int line_of(const std::string& key) const {
        auto it = lines_.find(key);
        return it == lines_.end() ? 0 : it->second;
    }

    std::string source_ = "<config>";
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    mutable std::set<std::string> used_;
};

/// 64-bit FNV-1a, hex encoded.
inline std::string fingerprint(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xf];
    return out;
}

}  // namespace asnet
