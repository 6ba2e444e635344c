#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relbn/dataset.hpp"
#include "relbn/vdb.hpp"

namespace relbn {

// Catalog rows equivalent to what the classic analyzer script reads from
// INFORMATION_SCHEMA. constraint_name is "PRIMARY" for primary-key rows and
// "fk_<n>" for foreign-key rows.
struct KeyInfoRow {
    std::string table;
    std::string column;
    std::string referenced_table;   // empty for PRIMARY rows
    std::string referenced_column;  // empty for PRIMARY rows
    std::string constraint_name;
    int ordinal_position = 0;  // FK declaration order; 0 for PRIMARY rows
};

struct PositionInfoRow {
    std::string table;
    std::string column;
    int ordinal_position = 0;  // 1-based column position
};

struct SchemaMetadata {
    struct TableInfo {
        std::string name;
        std::vector<std::string> columns;
    };
    std::vector<TableInfo> tables;
    std::map<std::string, std::vector<std::string>> primary_keys;
    std::vector<ForeignKey> foreign_keys_by_table_order;  // flattened, with table names
    std::map<std::string, std::vector<ForeignKey>> foreign_keys;

    std::vector<KeyInfoRow> key_info() const;        // Schema_Key_Info analog
    std::vector<PositionInfoRow> position_info() const;
    // KeyColumns is referenced by the classic script but never created; we
    // reconstruct it as the union of primary-key and foreign-key rows.
    std::vector<KeyInfoRow> key_columns() const;
    // Distinct primary-key or foreign-key columns of a table.
    std::vector<std::string> entity_columns(const std::string& table) const;
    int num_entity_columns(const std::string& table) const;

    const TableInfo* find_table(const std::string& name) const;
};

SchemaMetadata extract_metadata(const DatasetManifest& manifest);

struct RelationshipFlags {
    bool self_relationship = false;
    bool many_one = false;
};

// Total classification: every table lands in exactly one bucket.
struct Classification {
    std::vector<std::string> entity_tables;
    std::map<std::string, RelationshipFlags> relationship_tables;
    std::vector<ExcludedTable> excluded;

    bool is_entity(const std::string& table) const;
};

Classification classify_tables(const SchemaMetadata& md);

// Emits FOVars and all par-RVs; domains are left empty.
VDB generate_par_rvs(const Classification& cls, const SchemaMetadata& md);

// Fills in domains from observed data. Entity attribute domains are the
// sorted distinct column values; relationship attribute domains additionally
// contain "n/a"; indicator domains are {F,T}.
void build_domains(VDB& vdb, const Dataset& dataset);

// extract -> classify -> generate -> build_domains.
VDB analyze(const Dataset& dataset);

}  // namespace relbn
