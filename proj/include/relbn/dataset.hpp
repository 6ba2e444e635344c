#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace relbn {

struct ForeignKey {
    std::string column;
    std::string referenced_table;
    std::string referenced_column;
    int ordinal_position = 0;  // 1-based declaration order within the table
};

struct TableDef {
    std::string name;
    std::string csv_path;  // resolved to an absolute/openable path at manifest load
    std::vector<std::string> columns;
    std::vector<std::string> primary_key;
    std::vector<ForeignKey> foreign_keys;

    bool has_column(const std::string& col) const;
    bool is_key_column(const std::string& col) const;  // PK or FK column
};

// Declarative description of a relational dataset: tables + keys + CSV paths.
// This replaces a live RDBMS catalog; the analyzer only ever consumes rows
// equivalent to INFORMATION_SCHEMA.KEY_COLUMN_USAGE / COLUMNS.
struct DatasetManifest {
    std::string path;
    std::vector<TableDef> tables;

    static DatasetManifest load(const std::string& path);
    static DatasetManifest parse(const std::string& json_text, const std::string& origin,
                                 const std::string& base_dir);

    const TableDef* find_table(const std::string& name) const;
};

// Interned string values. Id 0 is always the reserved sentinel "n/a".
class ValuePool {
public:
    static constexpr uint32_t kInvalid = UINT32_MAX;
    static constexpr uint32_t kNAId = 0;
    static const char* kNA;

    ValuePool();
    uint32_t intern(const std::string& s);
    uint32_t find(const std::string& s) const;
    const std::string& str(uint32_t id) const;
    size_t size() const { return strings_.size(); }

private:
    std::unordered_map<std::string, uint32_t> map_;
    std::vector<std::string> strings_;
};

struct LoadedTable {
    const TableDef* def = nullptr;
    std::vector<std::vector<uint32_t>> rows;  // row-major, interned values

    int column_index(const std::string& col) const;
    size_t num_rows() const { return rows.size(); }

    // Unique index over the primary key, built at load time. Keys are the
    // interned PK values in declaration order.
    std::unordered_map<std::string, size_t> pk_index;  // packed key -> row
    static std::string pack_key(const std::vector<uint32_t>& vals);

private:
    friend class Dataset;
    std::unordered_map<std::string, int> col_index_;
};

// An immutable snapshot of the loaded dataset. All values are interned in a
// shared pool; loading validates PK uniqueness, FK integrity, and rejects
// empty strings and the reserved "n/a" token in data.
class Dataset {
public:
    static Dataset load(DatasetManifest manifest);
    static Dataset load_file(const std::string& manifest_path);

    // LoadedTable::def points into manifest_.tables; moving keeps the vector's
    // heap storage, copying would not.
    Dataset(Dataset&&) = default;
    Dataset& operator=(Dataset&&) = default;
    Dataset(const Dataset&) = delete;
    Dataset& operator=(const Dataset&) = delete;

    const DatasetManifest& manifest() const { return manifest_; }
    const LoadedTable& table(const std::string& name) const;
    const LoadedTable* find_table(const std::string& name) const;
    const ValuePool& pool() const { return pool_; }
    ValuePool& pool() { return pool_; }

    // Row index for a single-column key value, or SIZE_MAX.
    size_t pk_row(const std::string& table, uint32_t value) const;

private:
    Dataset() = default;

    DatasetManifest manifest_;
    ValuePool pool_;
    std::unordered_map<std::string, LoadedTable> tables_;
};

}  // namespace relbn
