#pragma once
// RFC 4180 CSV reading and writing. UTF-8, comma-separated, mandatory header
// row, quotes honored, newlines normalized to LF on output.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "otdc/schema.hpp"

namespace otdc {

class CsvError : public InputError {
  public:
    CsvError(const std::string& file, std::size_t line, const std::string& what)
        : InputError(file + ":" + std::to_string(line) + ": " + what), file_(file),
          line_(line) {}
    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

  private:
    std::string file_;
    std::size_t line_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_of(const std::string& name, const std::string& file) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw CsvError(file, 1, "missing required column '" + name + "'");
    }
};

namespace detail {

// Splits one physical CSV record; `line` may grow across quoted newlines.
inline std::vector<std::string> split_record(const std::string& record,
                                             const std::string& file, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < record.size(); ++i) {
        const char c = record[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < record.size() && record[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            if (!cur.empty())
                throw CsvError(file, line_no, "quote inside unquoted field");
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw CsvError(file, line_no, "unterminated quoted field");
    fields.push_back(cur);
    return fields;
}

} // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file '" + path + "'");
    CsvTable table;
    std::string line, record;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // a record with an odd number of quotes continues on the next line
        record = line;
        std::size_t start_line = line_no;
        auto quote_count = [](const std::string& s) {
            std::size_t n = 0;
            for (char c : s)
                if (c == '"') ++n;
            return n;
        };
        while (quote_count(record) % 2 == 1 && std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            record += '\n';
            record += line;
        }
        if (record.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
        auto fields = detail::split_record(record, path, start_line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            if (table.header.empty() || (table.header.size() == 1 && table.header[0].empty()))
                throw CsvError(path, start_line, "empty header row");
        } else {
            if (fields.size() != table.header.size())
                throw CsvError(path, start_line,
                               "expected " + std::to_string(table.header.size()) +
                                   " fields, got " + std::to_string(fields.size()));
            table.rows.push_back(std::move(fields));
        }
    }
    if (table.header.empty()) throw CsvError(path, 1, "empty file");
    return table;
}

inline std::string csv_quote(const std::string& field) {
    bool needs = false;
    for (char c : field)
        if (c == ',' || c == '"' || c == '\n' || c == '\r') needs = true;
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file '" + path + "'");
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << csv_quote(table.header[i]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_quote(row[i]);
        }
        out << '\n';
    }
}

// Deterministic schema inference: per-column distinct values, sorted
// numerically when the whole column parses as numbers, lexicographically
// otherwise.
inline Schema infer_schema(const CsvTable& table) {
    std::vector<Attribute> attrs;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        std::vector<std::string> values;
        for (const auto& row : table.rows) {
            const std::string v = detail::trim(row[c]);
            bool seen = false;
            for (const auto& u : values)
                if (u == v) {
                    seen = true;
                    break;
                }
            if (!seen) values.push_back(v);
        }
        bool numeric = !values.empty();
        std::vector<double> parsed(values.size());
        for (std::size_t i = 0; i < values.size() && numeric; ++i) {
            try {
                std::size_t pos = 0;
                parsed[i] = std::stod(values[i], &pos);
                if (pos != values[i].size()) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        std::vector<std::size_t> order(values.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        if (numeric)
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return parsed[a] < parsed[b]; });
        else
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<std::string> domain(values.size());
        for (std::size_t i = 0; i < order.size(); ++i) domain[i] = values[order[i]];
        attrs.push_back({table.header[c], std::move(domain)});
    }
    return Schema(std::move(attrs));
}

// "A:0,1;B:x,y" -> explicit domains, keeping the header's attribute order.
inline Schema parse_schema_spec(const std::string& spec,
                                const std::vector<std::string>& header) {
    std::vector<Attribute> attrs;
    std::stringstream ss(spec);
    std::string part;
    std::vector<Attribute> declared;
    while (std::getline(ss, part, ';')) {
        const auto colon = part.find(':');
        if (colon == std::string::npos)
            throw InputError("schema spec: expected 'name:v1,v2,...' in '" + part + "'");
        Attribute a;
        a.name = detail::trim(part.substr(0, colon));
        std::stringstream vs(part.substr(colon + 1));
        std::string v;
        while (std::getline(vs, v, ',')) a.domain.push_back(detail::trim(v));
        declared.push_back(std::move(a));
    }
    for (const auto& name : header) {
        bool found = false;
        for (auto& a : declared)
            if (a.name == name) {
                attrs.push_back(a);
                found = true;
                break;
            }
        if (!found) throw InputError("schema spec: no domain declared for column '" + name + "'");
    }
    return Schema(std::move(attrs));
}

struct Dataset {
    Schema schema;
    std::vector<Tuple> rows;
};

inline Dataset dataset_from_csv(const CsvTable& table, const Schema& schema,
                                const std::string& file) {
    Dataset ds;
    ds.schema = schema;
    ds.rows.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        try {
            ds.rows.push_back(schema.tuple_from_strings(table.rows[r]));
        } catch (const InputError& e) {
            throw CsvError(file, r + 2, e.what()); // +2: header row and 1-based lines
        }
    }
    return ds;
}

} // namespace otdc
