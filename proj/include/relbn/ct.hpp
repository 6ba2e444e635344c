#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace relbn {

struct CTRow {
    std::vector<std::string> values;
    int64_t count = 0;
    bool operator==(const CTRow&) const = default;
};

// Sufficient statistics: assignments of values to a par-RV list with the
// number of groundings realizing each. Zero-count assignments are omitted.
// Columns are par-RV ids sorted lexicographically; when target_column is
// nonempty it is an extra leading entity-id column (block access).
struct ContingencyTable {
    std::vector<std::string> columns;
    std::string target_column;  // empty unless this is a block target CT
    std::vector<CTRow> rows;

    int column_index(const std::string& id) const;
    int64_t total() const;
    void sort_rows();  // lexicographic by values
    bool operator==(const ContingencyTable&) const = default;

    std::string to_string() const;  // debugging / report aid
};

// Groups rows by the subset columns and sums counts. The subset must be
// contained in ct.columns; output columns are the subset, sorted.
ContingencyTable project_ct(const ContingencyTable& ct, const std::vector<std::string>& subset);

// Splits a block CT into its per-target slices (target column dropped).
// Returned pairs are sorted by target id.
std::vector<std::pair<std::string, ContingencyTable>> split_block_ct(const ContingencyTable& ct);

void export_ct(const ContingencyTable& ct, const std::string& path);
ContingencyTable import_ct(const std::string& path, bool has_target_column = false);

}  // namespace relbn
