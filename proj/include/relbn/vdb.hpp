#pragma once

#include <map>
#include <string>
#include <vector>

namespace relbn {

// First-order (population) variable over the rows of an entity table.
// index_number 0 is the primary variable; 1 is the duplicate a
// self-relationship needs so both slots can range independently.
struct FOVar {
    std::string id;            // e.g. "Student0"
    std::string entity_table;
    int index_number = 0;      // 0 or 1
    std::string pk_column;     // the entity table's single primary-key column
};

enum class ParRVKind {
    EntityAttribute,
    RelationshipIndicator,
    RelationshipAttribute,
};

// A parametrized random variable: a first-order atom such as
// Capability(Professor0,Student0), grounded by substituting entities.
struct ParRV {
    std::string id;                        // functor_name(fo_var,...)
    ParRVKind kind = ParRVKind::EntityAttribute;
    std::string functor_name;              // column name, or table name for indicators
    std::vector<std::string> fo_vars;      // FOVar ids, length 1 or 2
    std::string table;                     // linked data table
    std::string column;                    // linked column; empty for indicators
    std::vector<std::string> key_columns;  // indicators: FK column per fo_var slot
    std::string indicator_id;              // relationship attributes: owning indicator
    bool main = false;                     // all fo_vars have index_number 0
    bool self_relationship = false;        // indicators only
    bool many_one = false;                 // indicators only
};

std::string make_par_rv_id(const std::string& functor, const std::vector<std::string>& fo_vars);

struct ExcludedTable {
    std::string table;
    std::string reason;  // no-primary-key | ternary | composite-key
};

// The Random Variable Database: every par-RV derivable from the schema, the
// first-order variables they range over, and their finite domains.
struct VDB {
    std::vector<FOVar> pvariables;
    std::vector<ParRV> one_variables;   // entity attributes
    std::vector<ParRV> relationships;   // relationship indicators
    std::vector<ParRV> two_variables;   // relationship attributes
    std::vector<ExcludedTable> excluded_tables;
    std::map<std::string, std::vector<std::string>> domains;  // par-RV id -> ordered values
    std::vector<std::string> warnings;

    const FOVar* find_fovar(const std::string& id) const;
    const ParRV* find_par_rv(const std::string& id) const;
    const ParRV& par_rv(const std::string& id) const;  // throws on unknown id
    const std::vector<std::string>& domain(const std::string& par_rv_id) const;

    // All par-RV ids, sorted lexicographically.
    std::vector<std::string> all_par_rv_ids() const;
    size_t num_par_rvs() const {
        return one_variables.size() + relationships.size() + two_variables.size();
    }
};

class Dataset;
struct DatasetManifest;

// Serializes the VDB directory with the classic table layouts
// (AttributeColumns, Domain, Pvariables, 1Variables, 2Variables, Relationship,
// Relationship_Attributes, Relationship_FOvariables, plus Excluded).
void export_vdb(const VDB& vdb, const std::string& dir);
VDB import_vdb(const std::string& dir, const DatasetManifest& manifest);

}  // namespace relbn
