#include "relbn/csv.hpp"

#include <fstream>
#include <sstream>

#include "relbn/error.hpp"

namespace relbn::csv {

Table parse(const std::string& text, const std::string& origin) {
    Table table;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool any_field = false;
    size_t line = 1;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_was_quoted = false;
        any_field = false;
    };
    auto end_record = [&] {
        end_field();
        if (table.header.empty()) {
            table.header = record;
        } else {
            if (record.size() != table.header.size())
                fail_validation(origin + ": line " + std::to_string(line) + " has " +
                                std::to_string(record.size()) + " fields, header has " +
                                std::to_string(table.header.size()));
            table.rows.push_back(record);
        }
        record.clear();
    };

    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
                ++i;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || field_was_quoted)
                    fail_validation(origin + ": line " + std::to_string(line) +
                                    ": quote inside unquoted field");
                in_quotes = true;
                field_was_quoted = true;
                any_field = true;
                ++i;
                break;
            case ',':
                end_field();
                any_field = true;  // a comma implies a following (possibly empty) field
                ++i;
                break;
            case '\r':
                if (i + 1 < n && text[i + 1] == '\n') ++i;
                [[fallthrough]];
            case '\n':
                end_record();
                ++line;
                ++i;
                break;
            default:
                field += c;
                any_field = true;
                ++i;
                break;
        }
    }
    if (in_quotes)
        fail_validation(origin + ": unterminated quoted field at end of file");
    if (any_field || !field.empty() || !record.empty()) end_record();
    if (table.header.empty())
        fail_validation(origin + ": empty CSV (missing header row)");
    return table;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_validation("cannot open CSV file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

std::string format_field(const std::string& field) {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string format(const Table& table) {
    std::string out;
    auto emit = [&](const std::vector<std::string>& record) {
        for (size_t i = 0; i < record.size(); ++i) {
            if (i) out += ',';
            out += format_field(record[i]);
        }
        out += '\n';
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
    return out;
}

void write_file(const std::string& path, const Table& table) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Validation, "cannot write CSV file: " + path);
    out << format(table);
    if (!out) fail(ErrorKind::Validation, "write failed: " + path);
}

}  // namespace relbn::csv
