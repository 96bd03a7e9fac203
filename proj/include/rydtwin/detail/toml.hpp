#pragma once

// Minimal TOML subset used for scenario files: [tables], key = value with
// strings, booleans, numbers and (nested) arrays, plus # comments. No dates,
// inline tables or multiline strings.

#include <cctype>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "rydtwin/errors.hpp"

namespace rydtwin::detail {

struct TomlValue;
using TomlArray = std::vector<TomlValue>;

struct TomlValue {
    std::variant<double, bool, std::string, TomlArray> data;

    bool is_number() const { return std::holds_alternative<double>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_array() const { return std::holds_alternative<TomlArray>(data); }

    double as_number(const std::string& ctx) const {
        if (!is_number()) throw config_error("config: expected a number for " + ctx);
        return std::get<double>(data);
    }
    bool as_bool(const std::string& ctx) const {
        if (!is_bool()) throw config_error("config: expected a boolean for " + ctx);
        return std::get<bool>(data);
    }
    const std::string& as_string(const std::string& ctx) const {
        if (!is_string()) throw config_error("config: expected a string for " + ctx);
        return std::get<std::string>(data);
    }
    const TomlArray& as_array(const std::string& ctx) const {
        if (!is_array()) throw config_error("config: expected an array for " + ctx);
        return std::get<TomlArray>(data);
    }
};

using TomlTable = std::map<std::string, TomlValue>;
using TomlDocument = std::map<std::string, TomlTable>; ///< table name -> entries; "" = root

class TomlParser {
  public:
    static TomlDocument parse(const std::string& text) {
        TomlDocument doc;
        std::string table;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip(strip_comment(line));
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']') fail(lineno, "unterminated table header");
                table = strip(s.substr(1, s.size() - 2));
                if (table.empty()) fail(lineno, "empty table name");
                doc[table]; // ensure the table exists even if empty
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) fail(lineno, "expected key = value");
            const std::string key = strip(s.substr(0, eq));
            if (key.empty()) fail(lineno, "empty key");
            std::string rest = strip(s.substr(eq + 1));
            if (rest.empty()) fail(lineno, "missing value");
            std::size_t pos = 0;
            TomlValue v = parse_value(rest, pos, lineno);
            if (strip(rest.substr(pos)) != "") fail(lineno, "trailing characters after value");
            if (doc[table].count(key)) fail(lineno, "duplicate key '" + key + "'");
            doc[table][key] = std::move(v);
        }
        return doc;
    }

  private:
    [[noreturn]] static void fail(std::size_t lineno, const std::string& msg) {
        throw config_error("config line " + std::to_string(lineno) + ": " + msg);
    }

    static std::string strip(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    /// Removes a trailing comment, honoring quoted strings.
    static std::string strip_comment(const std::string& s) {
        bool in_string = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') in_string = !in_string;
            if (s[i] == '#' && !in_string) return s.substr(0, i);
        }
        return s;
    }

    static void skip_ws(const std::string& s, std::size_t& pos) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    static TomlValue parse_value(const std::string& s, std::size_t& pos, std::size_t lineno) {
        skip_ws(s, pos);
        if (pos >= s.size()) fail(lineno, "missing value");
        const char c = s[pos];
        if (c == '"') {
            std::string out;
            ++pos;
            while (pos < s.size() && s[pos] != '"') {
                if (s[pos] == '\\' && pos + 1 < s.size()) ++pos;
                out.push_back(s[pos++]);
            }
            if (pos >= s.size()) fail(lineno, "unterminated string");
            ++pos;
            return TomlValue{out};
        }
        if (c == '[') {
            ++pos;
            TomlArray arr;
            skip_ws(s, pos);
            if (pos < s.size() && s[pos] == ']') {
                ++pos;
                return TomlValue{arr};
            }
            for (;;) {
                arr.push_back(parse_value(s, pos, lineno));
                skip_ws(s, pos);
                if (pos >= s.size()) fail(lineno, "unterminated array");
                if (s[pos] == ',') {
                    ++pos;
                    continue;
                }
                if (s[pos] == ']') {
                    ++pos;
                    return TomlValue{arr};
                }
                fail(lineno, "expected ',' or ']' in array");
            }
        }
        if (s.compare(pos, 4, "true") == 0) {
            pos += 4;
            return TomlValue{true};
        }
        if (s.compare(pos, 5, "false") == 0) {
            pos += 5;
            return TomlValue{false};
        }
        // number
        std::size_t end = pos;
        while (end < s.size() && (std::isalnum(static_cast<unsigned char>(s[end])) ||
                                  s[end] == '+' || s[end] == '-' || s[end] == '.' || s[end] == '_'))
            ++end;
        std::string tok = s.substr(pos, end - pos);
        std::string clean;
        for (char ch : tok)
            if (ch != '_') clean.push_back(ch);
        try {
            std::size_t used = 0;
            const double v = std::stod(clean, &used);
            if (used != clean.size()) fail(lineno, "bad number '" + tok + "'");
            pos = end;
            return TomlValue{v};
        } catch (const std::exception&) {
            fail(lineno, "bad value '" + tok + "'");
        }
    }
};

} // namespace rydtwin::detail
