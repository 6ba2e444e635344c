#include "relbn/metaquery.hpp"

#include <algorithm>
#include <set>

#include "relbn/error.hpp"

namespace relbn {

std::string block_column_name(const std::string& fovar_id) { return fovar_id + "_id"; }

MetaQuery build_metaquery(const std::vector<std::string>& attr_var_ids, const VDB& vdb,
                          const MetaQueryOptions& opts) {
    // Attribute par-RVs, sorted by id; this fixes select and group-by order.
    std::vector<const ParRV*> attrs;
    for (const auto& id : attr_var_ids) {
        const ParRV& v = vdb.par_rv(id);
        if (v.kind == ParRVKind::RelationshipIndicator)
            fail_validation("build_metaquery: " + id +
                            " is a relationship indicator, not an attribute");
        attrs.push_back(&v);
    }
    std::sort(attrs.begin(), attrs.end(),
              [](const ParRV* a, const ParRV* b) { return a->id < b->id; });

    std::set<std::string> joined(opts.joined_relationships.begin(),
                                 opts.joined_relationships.end());
    for (const ParRV* a : attrs)
        if (a->kind == ParRVKind::RelationshipAttribute && !joined.count(a->indicator_id))
            fail_validation("build_metaquery: relationship attribute " + a->id +
                            " selected without joining its indicator " + a->indicator_id);

    // FOVars referenced by anything in the query.
    std::set<std::string> fovars(opts.scope_fovars.begin(), opts.scope_fovars.end());
    for (const ParRV* a : attrs) fovars.insert(a->fo_vars.begin(), a->fo_vars.end());
    for (const auto& rid : joined) {
        const ParRV& r = vdb.par_rv(rid);
        fovars.insert(r.fo_vars.begin(), r.fo_vars.end());
    }
    if (opts.restrict_fovar) fovars.insert(opts.restrict_fovar->first);
    if (opts.block_fovar) fovars.insert(*opts.block_fovar);

    MetaQuery mq;

    // FROM: entity tables aliased by FOVar id, then relationship tables
    // aliased by their indicator id.
    for (const auto& f : fovars) {
        const FOVar* fo = vdb.find_fovar(f);
        if (!fo) fail_validation("build_metaquery: unknown FOVar " + f);
        mq.from_list.push_back({fo->entity_table, fo->id});
    }
    for (const auto& rid : joined) {
        const ParRV& r = vdb.par_rv(rid);
        mq.from_list.push_back({r.table, r.id});
    }
    if (mq.from_list.empty())
        fail_validation("build_metaquery: the par-RV set references no table");

    // WHERE: one PK-FK equality per relationship FOVar slot.
    for (const auto& rid : joined) {
        const ParRV& r = vdb.par_rv(rid);
        for (size_t slot = 0; slot < r.fo_vars.size(); ++slot) {
            const FOVar* fo = vdb.find_fovar(r.fo_vars[slot]);
            EqCondition c;
            c.left = {r.id, r.key_columns[slot]};
            c.right = {fo->id, fo->pk_column};
            mq.where_list.push_back(c);
        }
    }
    if (opts.restrict_fovar) {
        const FOVar* fo = vdb.find_fovar(opts.restrict_fovar->first);
        EqCondition c;
        c.left = {fo->id, fo->pk_column};
        c.right_is_literal = true;
        c.literal = opts.restrict_fovar->second;
        mq.where_list.push_back(c);
    }

    // SELECT: count, the block-id column if any, then one aliased column per
    // attribute par-RV. GROUP BY mirrors the select list minus count.
    mq.select_list.push_back({true, {}, "count"});
    if (opts.block_fovar) {
        const FOVar* fo = vdb.find_fovar(*opts.block_fovar);
        SelectEntry e;
        e.col = {fo->id, fo->pk_column};
        e.output_name = block_column_name(fo->id);
        mq.select_list.push_back(e);
    }
    for (const ParRV* a : attrs) {
        SelectEntry e;
        e.col = {a->kind == ParRVKind::EntityAttribute ? a->fo_vars[0] : a->indicator_id,
                 a->column};
        e.output_name = a->id;
        mq.select_list.push_back(e);
    }
    for (const auto& e : mq.select_list)
        if (!e.is_count) mq.group_by_list.push_back(e.col);
    return mq;
}

MetaQuery build_metaquery(const std::vector<std::string>& var_ids, const VDB& vdb) {
    std::vector<std::string> attr_ids;
    MetaQueryOptions opts;
    std::set<std::string> joined;
    for (const auto& id : var_ids) {
        const ParRV& v = vdb.par_rv(id);
        if (v.kind == ParRVKind::RelationshipIndicator) {
            joined.insert(v.id);
        } else {
            attr_ids.push_back(id);
            if (v.kind == ParRVKind::RelationshipAttribute) joined.insert(v.indicator_id);
        }
    }
    opts.joined_relationships.assign(joined.begin(), joined.end());
    return build_metaquery(attr_ids, vdb, opts);
}

namespace {

std::string quote_ident(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string quote_literal(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "''";
        else out += c;
    }
    out += '\'';
    return out;
}

std::string render_col(const ColumnRef& c) {
    return quote_ident(c.table_alias) + "." + quote_ident(c.column);
}

}  // namespace

std::string render_sql(const MetaQuery& mq) {
    std::string sql = "SELECT ";
    for (size_t i = 0; i < mq.select_list.size(); ++i) {
        const auto& e = mq.select_list[i];
        if (i) sql += ", ";
        if (e.is_count) sql += "COUNT(*) AS " + quote_ident(e.output_name);
        else sql += render_col(e.col) + " AS " + quote_ident(e.output_name);
    }
    sql += "\nFROM ";
    for (size_t i = 0; i < mq.from_list.size(); ++i) {
        if (i) sql += ", ";
        sql += quote_ident(mq.from_list[i].first) + " AS " + quote_ident(mq.from_list[i].second);
    }
    if (!mq.where_list.empty()) {
        sql += "\nWHERE ";
        for (size_t i = 0; i < mq.where_list.size(); ++i) {
            const auto& c = mq.where_list[i];
            if (i) sql += " AND ";
            sql += render_col(c.left) + " = ";
            sql += c.right_is_literal ? quote_literal(c.literal) : render_col(c.right);
        }
    }
    if (!mq.group_by_list.empty()) {
        sql += "\nGROUP BY ";
        for (size_t i = 0; i < mq.group_by_list.size(); ++i) {
            if (i) sql += ", ";
            sql += render_col(mq.group_by_list[i]);
        }
    }
    sql += ";\n";
    return sql;
}

}  // namespace relbn
