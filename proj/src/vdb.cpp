#include "relbn/vdb.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "relbn/csv.hpp"
#include "relbn/dataset.hpp"
#include "relbn/error.hpp"
#include "relbn/schema_analyzer.hpp"

namespace fs = std::filesystem;

namespace relbn {

std::string make_par_rv_id(const std::string& functor, const std::vector<std::string>& fo_vars) {
    std::string id = functor + "(";
    for (size_t i = 0; i < fo_vars.size(); ++i) {
        if (i) id += ',';
        id += fo_vars[i];
    }
    id += ')';
    return id;
}

const FOVar* VDB::find_fovar(const std::string& id) const {
    for (const auto& p : pvariables)
        if (p.id == id) return &p;
    return nullptr;
}

const ParRV* VDB::find_par_rv(const std::string& id) const {
    for (const auto* list : {&one_variables, &relationships, &two_variables})
        for (const auto& v : *list)
            if (v.id == id) return &v;
    return nullptr;
}

const ParRV& VDB::par_rv(const std::string& id) const {
    const ParRV* v = find_par_rv(id);
    if (!v) fail_validation("unknown par-RV: " + id);
    return *v;
}

const std::vector<std::string>& VDB::domain(const std::string& par_rv_id) const {
    auto it = domains.find(par_rv_id);
    if (it == domains.end()) fail_validation("no domain for par-RV: " + par_rv_id);
    return it->second;
}

std::vector<std::string> VDB::all_par_rv_ids() const {
    std::vector<std::string> ids;
    for (const auto* list : {&one_variables, &relationships, &two_variables})
        for (const auto& v : *list) ids.push_back(v.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

namespace {

void write_table(const std::string& dir, const std::string& name, csv::Table t) {
    csv::write_file((fs::path(dir) / (name + ".csv")).string(), t);
}

}  // namespace

void export_vdb(const VDB& vdb, const std::string& dir) {
    fs::create_directories(dir);

    // AttributeColumns: distinct (table, column) links of attribute par-RVs.
    {
        std::set<std::pair<std::string, std::string>> links;
        for (const auto* list : {&vdb.one_variables, &vdb.two_variables})
            for (const auto& v : *list) links.insert({v.table, v.column});
        csv::Table t;
        t.header = {"TABLE_NAME", "COLUMN_NAME"};
        for (const auto& [tab, col] : links) t.rows.push_back({tab, col});
        write_table(dir, "AttributeColumns", std::move(t));
    }

    // Domain: keyed by functor name (the column name is the functor ID).
    {
        std::map<std::string, std::vector<std::string>> functor_domains;
        for (const auto* list : {&vdb.one_variables, &vdb.relationships, &vdb.two_variables})
            for (const auto& v : *list) {
                auto it = vdb.domains.find(v.id);
                if (it != vdb.domains.end()) functor_domains[v.functor_name] = it->second;
            }
        csv::Table t;
        t.header = {"COLUMN_NAME", "VALUE"};
        for (const auto& [functor, values] : functor_domains)
            for (const auto& val : values) t.rows.push_back({functor, val});
        write_table(dir, "Domain", std::move(t));
    }

    {
        csv::Table t;
        t.header = {"Pvid", "TABLE_NAME"};
        for (const auto& p : vdb.pvariables) t.rows.push_back({p.id, p.entity_table});
        write_table(dir, "Pvariables", std::move(t));
    }
    {
        csv::Table t;
        t.header = {"1VarID", "COLUMN_NAME", "Pvid"};
        for (const auto& v : vdb.one_variables)
            t.rows.push_back({v.id, v.column, v.fo_vars[0]});
        write_table(dir, "1Variables", std::move(t));
    }
    {
        csv::Table t;
        t.header = {"2VarID", "COLUMN_NAME", "Pvid1", "Pvid2", "TABLE_NAME"};
        for (const auto& v : vdb.two_variables)
            t.rows.push_back({v.id, v.column, v.fo_vars[0], v.fo_vars[1], v.table});
        write_table(dir, "2Variables", std::move(t));
    }
    {
        csv::Table t;
        t.header = {"RVarID", "TABLE_NAME", "Pvid1", "Pvid2", "COLUMN_NAME1", "COLUMN_NAME2"};
        for (const auto& v : vdb.relationships)
            t.rows.push_back(
                {v.id, v.table, v.fo_vars[0], v.fo_vars[1], v.key_columns[0], v.key_columns[1]});
        write_table(dir, "Relationship", std::move(t));
    }
    {
        // Attributes associated with each relationship: its own relationship
        // attributes plus the entity attributes of the involved FO variables.
        csv::Table t;
        t.header = {"RVarID", "AVarID", "FO-ID"};
        for (const auto& r : vdb.relationships) {
            for (const auto& a : vdb.two_variables)
                if (a.indicator_id == r.id) t.rows.push_back({r.id, a.id, ""});
            for (const auto& fo : r.fo_vars)
                for (const auto& a : vdb.one_variables)
                    if (a.fo_vars[0] == fo) t.rows.push_back({r.id, a.id, fo});
        }
        write_table(dir, "Relationship_Attributes", std::move(t));
    }
    {
        csv::Table t;
        t.header = {"RVarID", "FO-ID", "TABLE_NAME"};
        for (const auto& r : vdb.relationships)
            for (const auto& fo : r.fo_vars) {
                const FOVar* f = vdb.find_fovar(fo);
                t.rows.push_back({r.id, fo, f ? f->entity_table : ""});
            }
        write_table(dir, "Relationship_FOvariables", std::move(t));
    }
    {
        csv::Table t;
        t.header = {"TABLE_NAME", "REASON"};
        for (const auto& e : vdb.excluded_tables) t.rows.push_back({e.table, e.reason});
        write_table(dir, "Excluded", std::move(t));
    }
}

namespace {

csv::Table read_table(const std::string& dir, const std::string& name,
                      const std::vector<std::string>& header) {
    fs::path p = fs::path(dir) / (name + ".csv");
    if (!fs::exists(p))
        fail(ErrorKind::MissingDependency, "VDB file missing: " + p.string());
    csv::Table t = csv::read_file(p.string());
    if (t.header != header)
        fail_validation("VDB file " + p.string() + " has unexpected columns");
    return t;
}

}  // namespace

VDB import_vdb(const std::string& dir, const DatasetManifest& manifest) {
    VDB vdb;

    SchemaMetadata md = extract_metadata(manifest);
    Classification cls = classify_tables(md);

    csv::Table pv = read_table(dir, "Pvariables", {"Pvid", "TABLE_NAME"});
    for (const auto& row : pv.rows) {
        FOVar f;
        f.id = row[0];
        f.entity_table = row[1];
        if (f.id.size() <= f.entity_table.size() || f.id.back() < '0' || f.id.back() > '9')
            fail_validation("VDB Pvariables: malformed Pvid " + f.id);
        f.index_number = f.id.back() - '0';
        auto pk = md.primary_keys.find(f.entity_table);
        if (pk == md.primary_keys.end() || pk->second.size() != 1)
            fail_validation("VDB Pvariables: " + f.entity_table +
                            " has no single-column primary key in the manifest");
        f.pk_column = pk->second[0];
        vdb.pvariables.push_back(std::move(f));
    }

    csv::Table rel =
        read_table(dir, "Relationship",
                   {"RVarID", "TABLE_NAME", "Pvid1", "Pvid2", "COLUMN_NAME1", "COLUMN_NAME2"});
    for (const auto& row : rel.rows) {
        ParRV v;
        v.id = row[0];
        v.kind = ParRVKind::RelationshipIndicator;
        v.functor_name = row[1];
        v.table = row[1];
        v.fo_vars = {row[2], row[3]};
        v.key_columns = {row[4], row[5]};
        auto it = cls.relationship_tables.find(v.table);
        if (it != cls.relationship_tables.end()) {
            v.self_relationship = it->second.self_relationship;
            v.many_one = it->second.many_one;
        }
        bool all_main = true;
        for (const auto& fo : v.fo_vars) {
            const FOVar* f = vdb.find_fovar(fo);
            if (!f) fail_validation("VDB Relationship: unknown Pvid " + fo);
            all_main = all_main && f->index_number == 0;
        }
        v.main = all_main;
        vdb.relationships.push_back(std::move(v));
    }

    csv::Table ones = read_table(dir, "1Variables", {"1VarID", "COLUMN_NAME", "Pvid"});
    for (const auto& row : ones.rows) {
        ParRV v;
        v.id = row[0];
        v.kind = ParRVKind::EntityAttribute;
        v.functor_name = row[1];
        v.column = row[1];
        v.fo_vars = {row[2]};
        const FOVar* f = vdb.find_fovar(row[2]);
        if (!f) fail_validation("VDB 1Variables: unknown Pvid " + row[2]);
        v.table = f->entity_table;
        v.main = f->index_number == 0;
        vdb.one_variables.push_back(std::move(v));
    }

    csv::Table twos =
        read_table(dir, "2Variables", {"2VarID", "COLUMN_NAME", "Pvid1", "Pvid2", "TABLE_NAME"});
    for (const auto& row : twos.rows) {
        ParRV v;
        v.id = row[0];
        v.kind = ParRVKind::RelationshipAttribute;
        v.functor_name = row[1];
        v.column = row[1];
        v.fo_vars = {row[2], row[3]};
        v.table = row[4];
        for (const auto& r : vdb.relationships)
            if (r.table == v.table && r.fo_vars == v.fo_vars) v.indicator_id = r.id;
        if (v.indicator_id.empty())
            fail_validation("VDB 2Variables: no indicator for " + v.id);
        bool all_main = true;
        for (const auto& fo : v.fo_vars) {
            const FOVar* f = vdb.find_fovar(fo);
            if (!f) fail_validation("VDB 2Variables: unknown Pvid " + fo);
            all_main = all_main && f->index_number == 0;
        }
        v.main = all_main;
        vdb.two_variables.push_back(std::move(v));
    }

    csv::Table dom = read_table(dir, "Domain", {"COLUMN_NAME", "VALUE"});
    std::map<std::string, std::vector<std::string>> functor_domains;
    for (const auto& row : dom.rows) functor_domains[row[0]].push_back(row[1]);
    for (const auto* list : {&vdb.one_variables, &vdb.relationships, &vdb.two_variables})
        for (const auto& v : *list) {
            auto it = functor_domains.find(v.functor_name);
            if (it == functor_domains.end())
                fail_validation("VDB Domain: no values for functor " + v.functor_name);
            vdb.domains[v.id] = it->second;
        }

    csv::Table exc = read_table(dir, "Excluded", {"TABLE_NAME", "REASON"});
    for (const auto& row : exc.rows) vdb.excluded_tables.push_back({row[0], row[1]});

    return vdb;
}

}  // namespace relbn
