#include "relbn/schema_analyzer.hpp"

#include <algorithm>
#include <set>

#include "relbn/error.hpp"

namespace relbn {

SchemaMetadata extract_metadata(const DatasetManifest& manifest) {
    SchemaMetadata md;
    for (const auto& t : manifest.tables) {
        md.tables.push_back({t.name, t.columns});
        md.primary_keys[t.name] = t.primary_key;
        md.foreign_keys[t.name] = t.foreign_keys;
        for (const auto& fk : t.foreign_keys) md.foreign_keys_by_table_order.push_back(fk);
    }
    // Referential checks are already enforced by DatasetManifest parsing; the
    // ordinal-position invariant is structural (1..n per table).
    return md;
}

std::vector<KeyInfoRow> SchemaMetadata::key_info() const {
    std::vector<KeyInfoRow> rows;
    for (const auto& t : tables) {
        auto pk = primary_keys.find(t.name);
        if (pk != primary_keys.end())
            for (const auto& col : pk->second)
                rows.push_back({t.name, col, "", "", "PRIMARY", 0});
        auto fks = foreign_keys.find(t.name);
        if (fks != foreign_keys.end())
            for (const auto& fk : fks->second)
                rows.push_back({t.name, fk.column, fk.referenced_table, fk.referenced_column,
                                "fk_" + std::to_string(fk.ordinal_position),
                                fk.ordinal_position});
    }
    return rows;
}

std::vector<PositionInfoRow> SchemaMetadata::position_info() const {
    std::vector<PositionInfoRow> rows;
    for (const auto& t : tables)
        for (size_t i = 0; i < t.columns.size(); ++i)
            rows.push_back({t.name, t.columns[i], static_cast<int>(i + 1)});
    return rows;
}

std::vector<KeyInfoRow> SchemaMetadata::key_columns() const { return key_info(); }

std::vector<std::string> SchemaMetadata::entity_columns(const std::string& table) const {
    std::set<std::string> cols;
    auto pk = primary_keys.find(table);
    if (pk != primary_keys.end()) cols.insert(pk->second.begin(), pk->second.end());
    auto fks = foreign_keys.find(table);
    if (fks != foreign_keys.end())
        for (const auto& fk : fks->second) cols.insert(fk.column);
    return {cols.begin(), cols.end()};
}

int SchemaMetadata::num_entity_columns(const std::string& table) const {
    return static_cast<int>(entity_columns(table).size());
}

const SchemaMetadata::TableInfo* SchemaMetadata::find_table(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name) return &t;
    return nullptr;
}

bool Classification::is_entity(const std::string& table) const {
    return std::find(entity_tables.begin(), entity_tables.end(), table) != entity_tables.end();
}

Classification classify_tables(const SchemaMetadata& md) {
    Classification cls;
    for (const auto& t : md.tables) {
        const auto& pk = md.primary_keys.at(t.name);
        if (pk.empty()) {
            cls.excluded.push_back({t.name, "no-primary-key"});
            continue;
        }
        auto ecols = md.entity_columns(t.name);
        if (ecols.size() > 2) {
            cls.excluded.push_back({t.name, "ternary"});
            continue;
        }
        if (ecols.size() == 1) {
            cls.entity_tables.push_back(t.name);
            continue;
        }
        // Exactly two entity columns: a binary relationship candidate.
        const auto& fks = md.foreign_keys.at(t.name);
        std::set<std::string> fk_cols;
        for (const auto& fk : fks) fk_cols.insert(fk.column);
        std::set<std::string> pk_set(pk.begin(), pk.end());

        RelationshipFlags flags;
        // Self: two foreign keys referencing the same table/column at
        // distinct ordinal positions.
        for (size_t i = 0; i < fks.size(); ++i)
            for (size_t j = i + 1; j < fks.size(); ++j)
                if (fks[i].referenced_table == fks[j].referenced_table &&
                    fks[i].referenced_column == fks[j].referenced_column)
                    flags.self_relationship = true;
        // Many-one: the table has a primary-key column and a foreign-key
        // column outside the primary key.
        bool has_fk_outside_pk = false;
        for (const auto& c : fk_cols)
            if (!pk_set.count(c)) has_fk_outside_pk = true;
        flags.many_one = pk.size() == 1 && has_fk_outside_pk;

        if (fk_cols.size() == 2) {
            cls.relationship_tables[t.name] = flags;
        } else if (fk_cols.size() == 1 && pk.size() == 1 && !fk_cols.count(pk[0])) {
            // Many-one link embedded in a keyed table: the non-FK primary key
            // gives the table no population variable of its own, so no
            // par-RVs can be generated for it (see generate_par_rvs).
            cls.relationship_tables[t.name] = flags;
        } else {
            // Composite entity keys (and weak-entity patterns) lack the FK
            // structure of a binary relationship.
            cls.excluded.push_back({t.name, "composite-key"});
        }
    }
    return cls;
}

namespace {

std::vector<std::string> non_key_columns(const SchemaMetadata& md, const std::string& table) {
    const auto* t = md.find_table(table);
    std::set<std::string> keys;
    {
        auto pk = md.primary_keys.find(table);
        if (pk != md.primary_keys.end()) keys.insert(pk->second.begin(), pk->second.end());
        auto fks = md.foreign_keys.find(table);
        if (fks != md.foreign_keys.end())
            for (const auto& fk : fks->second) keys.insert(fk.column);
    }
    std::vector<std::string> out;
    for (const auto& c : t->columns)
        if (!keys.count(c)) out.push_back(c);
    return out;
}

}  // namespace

VDB generate_par_rvs(const Classification& cls, const SchemaMetadata& md) {
    VDB vdb;

    // Which entity tables need an index-1 duplicate: targets of a
    // self-relationship's foreign keys.
    std::set<std::string> self_targets;
    for (const auto& [rtable, flags] : cls.relationship_tables) {
        if (!flags.self_relationship) continue;
        for (const auto& fk : md.foreign_keys.at(rtable))
            if (cls.is_entity(fk.referenced_table)) self_targets.insert(fk.referenced_table);
    }

    std::map<std::string, std::vector<std::string>> fovars_by_table;
    for (const auto& t : md.tables) {
        if (!cls.is_entity(t.name)) continue;
        const auto& pk = md.primary_keys.at(t.name);
        int copies = self_targets.count(t.name) ? 2 : 1;
        for (int idx = 0; idx < copies; ++idx) {
            FOVar f;
            f.id = t.name + std::to_string(idx);
            f.entity_table = t.name;
            f.index_number = idx;
            f.pk_column = pk[0];
            fovars_by_table[t.name].push_back(f.id);
            vdb.pvariables.push_back(std::move(f));
        }
    }

    // Entity attributes: one par-RV per non-key column per FOVar.
    for (const auto& t : md.tables) {
        if (!cls.is_entity(t.name)) continue;
        for (const auto& col : non_key_columns(md, t.name)) {
            for (const auto& fovar : fovars_by_table[t.name]) {
                ParRV v;
                v.id = make_par_rv_id(col, {fovar});
                v.kind = ParRVKind::EntityAttribute;
                v.functor_name = col;
                v.fo_vars = {fovar};
                v.table = t.name;
                v.column = col;
                v.main = fovar.back() == '0';
                vdb.one_variables.push_back(std::move(v));
            }
        }
    }

    // Relationship indicators and their attributes.
    for (const auto& t : md.tables) {
        auto rit = cls.relationship_tables.find(t.name);
        if (rit == cls.relationship_tables.end()) continue;
        const RelationshipFlags& flags = rit->second;
        const auto& fks = md.foreign_keys.at(t.name);

        // Resolve the two slots: foreign keys in ordinal order whose target
        // is an entity table's primary-key column.
        struct Slot {
            std::string column;
            std::string entity_table;
        };
        std::vector<Slot> slots;
        bool resolvable = true;
        for (const auto& fk : fks) {
            if (!cls.is_entity(fk.referenced_table)) {
                vdb.warnings.push_back("relationship " + t.name + ": foreign key " + fk.column +
                                       " references non-entity table " + fk.referenced_table +
                                       "; no par-RVs generated");
                resolvable = false;
                continue;
            }
            const auto& ref_pk = md.primary_keys.at(fk.referenced_table);
            if (ref_pk.size() != 1 || ref_pk[0] != fk.referenced_column) {
                vdb.warnings.push_back("relationship " + t.name + ": foreign key " + fk.column +
                                       " does not reference the primary key of " +
                                       fk.referenced_table + "; no par-RVs generated");
                resolvable = false;
                continue;
            }
            slots.push_back({fk.column, fk.referenced_table});
        }
        if (!resolvable || slots.size() != 2) {
            if (resolvable) {
                std::string cols;
                for (const auto& c : non_key_columns(md, t.name))
                    cols += (cols.empty() ? "" : ", ") + c;
                vdb.warnings.push_back(
                    "relationship " + t.name +
                    ": only one entity-column slot resolves to a population variable; "
                    "no par-RVs generated" +
                    (cols.empty() ? "" : " (unmodelled attribute columns: " + cols + ")"));
            }
            continue;
        }

        std::vector<ParRV> indicators;
        for (const auto& fo1 : fovars_by_table[slots[0].entity_table]) {
            for (const auto& fo2 : fovars_by_table[slots[1].entity_table]) {
                int idx1 = fo1.back() - '0';
                int idx2 = fo2.back() - '0';
                if (flags.self_relationship && !(idx1 < idx2)) continue;
                ParRV v;
                v.id = make_par_rv_id(t.name, {fo1, fo2});
                v.kind = ParRVKind::RelationshipIndicator;
                v.functor_name = t.name;
                v.fo_vars = {fo1, fo2};
                v.table = t.name;
                v.key_columns = {slots[0].column, slots[1].column};
                v.main = idx1 == 0 && idx2 == 0;
                v.self_relationship = flags.self_relationship;
                v.many_one = flags.many_one;
                indicators.push_back(std::move(v));
            }
        }

        for (const auto& ind : indicators) {
            for (const auto& col : non_key_columns(md, t.name)) {
                ParRV v;
                v.id = make_par_rv_id(col, ind.fo_vars);
                v.kind = ParRVKind::RelationshipAttribute;
                v.functor_name = col;
                v.fo_vars = ind.fo_vars;
                v.table = t.name;
                v.column = col;
                v.indicator_id = ind.id;
                v.main = ind.main;
                vdb.two_variables.push_back(std::move(v));
            }
            vdb.relationships.push_back(ind);
        }
    }
    vdb.excluded_tables = cls.excluded;

    // Functor names must be unique across (table, column) links: the Domain
    // export is keyed by functor name alone.
    std::map<std::string, std::pair<std::string, std::string>> functor_links;
    for (const auto* list : {&vdb.one_variables, &vdb.relationships, &vdb.two_variables}) {
        for (const auto& v : *list) {
            std::pair<std::string, std::string> link{v.table, v.column};
            auto [it, inserted] = functor_links.emplace(v.functor_name, link);
            if (!inserted && it->second != link)
                fail_validation("functor name \"" + v.functor_name +
                                "\" is used by both " + it->second.first + "." +
                                it->second.second + " and " + link.first + "." + link.second +
                                "; rename one column so functor IDs stay unique");
        }
    }
    return vdb;
}

void build_domains(VDB& vdb, const Dataset& dataset) {
    auto distinct_sorted = [&](const std::string& table, const std::string& column) {
        const LoadedTable& t = dataset.table(table);
        int ci = t.column_index(column);
        if (ci < 0) fail_validation("table " + table + " has no column " + column);
        std::set<std::string> vals;
        for (const auto& row : t.rows) vals.insert(dataset.pool().str(row[ci]));
        return std::vector<std::string>(vals.begin(), vals.end());
    };

    for (const auto& v : vdb.one_variables) {
        auto vals = distinct_sorted(v.table, v.column);
        if (vals.empty())
            fail_validation("entity attribute " + v.id + ": table " + v.table +
                            " is empty; an entity population must be nonempty");
        vdb.domains[v.id] = vals;
    }
    for (const auto& v : vdb.relationships) vdb.domains[v.id] = {"F", "T"};
    for (const auto& v : vdb.two_variables) {
        auto vals = distinct_sorted(v.table, v.column);
        vals.push_back(ValuePool::kNA);
        std::sort(vals.begin(), vals.end());
        vdb.domains[v.id] = vals;
    }
    // Entity populations backing FOVars must be nonempty even when they carry
    // no attributes; an empty population makes every grounding space empty.
    for (const auto& p : vdb.pvariables)
        if (dataset.table(p.entity_table).num_rows() == 0)
            fail_validation("entity table " + p.entity_table + " is empty");
}

VDB analyze(const Dataset& dataset) {
    SchemaMetadata md = extract_metadata(dataset.manifest());
    Classification cls = classify_tables(md);
    VDB vdb = generate_par_rvs(cls, md);
    build_domains(vdb, dataset);
    return vdb;
}

}  // namespace relbn
