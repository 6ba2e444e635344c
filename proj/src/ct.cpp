#include "relbn/ct.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "relbn/csv.hpp"
#include "relbn/error.hpp"

namespace relbn {

int ContingencyTable::column_index(const std::string& id) const {
    int base = target_column.empty() ? 0 : 1;
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == id) return static_cast<int>(i) + base;
    return -1;
}

int64_t ContingencyTable::total() const {
    int64_t t = 0;
    for (const auto& r : rows) t += r.count;
    return t;
}

void ContingencyTable::sort_rows() {
    std::sort(rows.begin(), rows.end(),
              [](const CTRow& a, const CTRow& b) { return a.values < b.values; });
}

std::string ContingencyTable::to_string() const {
    std::ostringstream os;
    if (!target_column.empty()) os << target_column << " | ";
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? ", " : "") << columns[i];
    os << "\n";
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.values.size(); ++i) os << (i ? ", " : "") << r.values[i];
        os << " -> " << r.count << "\n";
    }
    return os.str();
}

ContingencyTable project_ct(const ContingencyTable& ct, const std::vector<std::string>& subset) {
    if (!ct.target_column.empty())
        fail_validation("project_ct: block target CTs cannot be projected");
    std::vector<std::string> cols(subset.begin(), subset.end());
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

    std::vector<int> idx;
    for (const auto& c : cols) {
        int i = ct.column_index(c);
        if (i < 0) fail_validation("project_ct: column " + c + " is not in the table");
        idx.push_back(i);
    }
    std::map<std::vector<std::string>, int64_t> groups;
    for (const auto& r : ct.rows) {
        std::vector<std::string> key;
        key.reserve(idx.size());
        for (int i : idx) key.push_back(r.values[i]);
        groups[key] += r.count;
    }
    ContingencyTable out;
    out.columns = cols;
    for (auto& [k, c] : groups) out.rows.push_back({k, c});
    return out;
}

std::vector<std::pair<std::string, ContingencyTable>> split_block_ct(const ContingencyTable& ct) {
    if (ct.target_column.empty())
        fail_validation("split_block_ct: not a block target CT");
    std::map<std::string, ContingencyTable> slices;
    for (const auto& r : ct.rows) {
        ContingencyTable& slice = slices[r.values[0]];
        if (slice.columns.empty()) slice.columns = ct.columns;
        slice.rows.push_back({{r.values.begin() + 1, r.values.end()}, r.count});
    }
    std::vector<std::pair<std::string, ContingencyTable>> out;
    for (auto& [id, slice] : slices) {
        slice.sort_rows();
        out.emplace_back(id, std::move(slice));
    }
    return out;
}

void export_ct(const ContingencyTable& ct, const std::string& path) {
    csv::Table t;
    if (!ct.target_column.empty()) t.header.push_back(ct.target_column);
    for (const auto& c : ct.columns) t.header.push_back(c);
    t.header.push_back("count");
    for (const auto& r : ct.rows) {
        std::vector<std::string> row = r.values;
        row.push_back(std::to_string(r.count));
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

ContingencyTable import_ct(const std::string& path, bool has_target_column) {
    csv::Table t = csv::read_file(path);
    if (t.header.empty() || t.header.back() != "count")
        fail_validation("CT file " + path + ": last column must be \"count\"");
    ContingencyTable ct;
    size_t first = 0;
    if (has_target_column) {
        if (t.header.size() < 2) fail_validation("CT file " + path + ": missing target column");
        ct.target_column = t.header[0];
        first = 1;
    }
    ct.columns.assign(t.header.begin() + first, t.header.end() - 1);
    for (const auto& row : t.rows) {
        CTRow r;
        r.values.assign(row.begin(), row.end() - 1);
        try {
            r.count = std::stoll(row.back());
        } catch (const std::exception&) {
            fail_validation("CT file " + path + ": bad count value " + row.back());
        }
        if (r.count <= 0)
            fail_validation("CT file " + path + ": counts must be positive");
        ct.rows.push_back(std::move(r));
    }
    return ct;
}

}  // namespace relbn
