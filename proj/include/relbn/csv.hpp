#pragma once

#include <string>
#include <vector>

namespace relbn::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// RFC-4180 style: comma separated, double-quote quoting, "" escapes a quote.
// Accepts \n and \r\n line endings. The first record is the header.
Table read_file(const std::string& path);
Table parse(const std::string& text, const std::string& origin);

// Deterministic writer: fields are quoted only when they contain a comma,
// quote, or newline; records end with \n.
std::string format(const Table& table);
void write_file(const std::string& path, const Table& table);

std::string format_field(const std::string& field);

}  // namespace relbn::csv
