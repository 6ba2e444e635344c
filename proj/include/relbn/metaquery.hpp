#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relbn/vdb.hpp"

namespace relbn {

struct ColumnRef {
    std::string table_alias;
    std::string column;
    bool operator==(const ColumnRef&) const = default;
};

// One equality in the WHERE list: either a join between two aliased columns
// or a restriction of an aliased column to a literal.
struct EqCondition {
    ColumnRef left;
    bool right_is_literal = false;
    ColumnRef right;      // when !right_is_literal
    std::string literal;  // when right_is_literal
};

struct SelectEntry {
    bool is_count = false;
    ColumnRef col;            // unused for the count entry
    std::string output_name;  // par-RV id, "count", or the target-id column name
};

// The four-part abstract count query. group_by_list always equals the
// select list minus the count column.
struct MetaQuery {
    std::vector<SelectEntry> select_list;
    std::vector<std::pair<std::string, std::string>> from_list;  // (table, alias)
    std::vector<EqCondition> where_list;
    std::vector<ColumnRef> group_by_list;
};

struct MetaQueryOptions {
    // FOVars that must appear in FROM even if no selected par-RV references
    // them (keeps counts over the full grounding space during completion).
    std::vector<std::string> scope_fovars;
    // Indicators whose relationship tables are joined (constrained true)
    // without contributing an output column.
    std::vector<std::string> joined_relationships;
    // Restrict one FOVar to a single entity (single target access).
    std::optional<std::pair<std::string, std::string>> restrict_fovar;  // (fovar, id value)
    // Add one FOVar's primary key as a leading output column (block access).
    std::optional<std::string> block_fovar;
};

// Builds the metaquery for a list of attribute par-RVs. Relationship
// attributes require their indicator in joined_relationships.
MetaQuery build_metaquery(const std::vector<std::string>& attr_var_ids, const VDB& vdb,
                          const MetaQueryOptions& opts);

// Spec-facing convenience: vars may mix attributes and indicators; indicators
// (explicit or implied by relationship attributes) are joined as true.
MetaQuery build_metaquery(const std::vector<std::string>& var_ids, const VDB& vdb);

// Renders standard SQL text: SELECT / FROM / WHERE / GROUP BY, identifiers
// double-quoted, literals single-quoted. Deterministic formatting.
std::string render_sql(const MetaQuery& mq);

// Output column name used for the block target-id column of a FOVar.
std::string block_column_name(const std::string& fovar_id);

}  // namespace relbn
