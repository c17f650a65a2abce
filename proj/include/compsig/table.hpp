#pragma once
// CSV tables and JSON sidecars. Numbers are written with 17 significant digits
// through std::to_chars, so output is locale-independent and round-trips exactly.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "json.hpp"

#include "compsig/error.hpp"

namespace compsig {

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw data_error("not a number: '" + std::string(s) + "'");
    }
    return v;
}

inline std::uint64_t parse_uint(std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw data_error("not a non-negative integer: '" + std::string(s) + "'");
    }
    return v;
}

using Cell = std::variant<std::string, double, std::int64_t>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        throw data_error("missing column '" + std::string(name) + "'");
    }
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string cell_text(const Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c)) return csv_escape(*s);
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    return std::to_string(std::get<std::int64_t>(c));
}

} // namespace detail

inline void write_csv(std::ostream& out, const Table& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << detail::csv_escape(t.columns[i]);
    out << '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw Error(ErrorKind::internal, "table row arity mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::cell_text(row[i]);
        out << '\n';
    }
}

inline void save_csv(const std::string& path, const Table& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path);
    write_csv(out, t);
    if (!out) throw data_error("write failed: " + path);
}

// Every cell is read back as a string; callers convert with parse_double/parse_uint.
inline Table read_csv(std::istream& in) {
    Table t;
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false, any = false;
    char c;
    std::size_t line = 1;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            continue;
        } else if (c == '\n') {
            record.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(record));
            record.clear();
            any = false;
            ++line;
        } else {
            field += c;
        }
    }
    if (quoted) throw data_error("unterminated quoted CSV field near line " + std::to_string(line));
    if (any) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    if (records.empty()) throw data_error("CSV has no header row");
    t.columns = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.columns.size()) {
            throw data_error("CSV row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                             " fields, header has " + std::to_string(t.columns.size()));
        }
        std::vector<Cell> row;
        for (auto& s : records[r]) row.emplace_back(std::move(s));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    return with_context(path, [&] { return read_csv(in); });
}

inline const std::string& text_cell(const Table& t, std::size_t row, std::size_t col) {
    const auto* s = std::get_if<std::string>(&t.rows[row][col]);
    if (!s) throw Error(ErrorKind::internal, "expected a text cell");
    return *s;
}

inline double number_cell(const Table& t, std::size_t row, std::size_t col) {
    const Cell& c = t.rows[row][col];
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    return with_context("row " + std::to_string(row + 2) + ", column '" + t.columns[col] + "'",
                        [&] { return parse_double(std::get<std::string>(c)); });
}

// Sidecar metadata written next to an output as <path>.meta.json.
inline void save_json(const std::string& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw data_error("write failed: " + path);
}

} // namespace compsig
