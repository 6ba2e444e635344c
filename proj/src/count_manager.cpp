#include "relbn/count_manager.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "relbn/error.hpp"

namespace relbn {

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Group-by over CT rows keyed by a column subset; keeps the target column
// (when present) as part of the key.
ContingencyTable group_onto(const ContingencyTable& ct, const std::vector<std::string>& cols) {
    std::vector<int> idx;
    size_t base = ct.target_column.empty() ? 0 : 1;
    for (const auto& c : cols) {
        int i = ct.column_index(c);
        if (i < 0) fail_internal("group_onto: missing column " + c);
        idx.push_back(i);
    }
    std::map<std::vector<std::string>, int64_t> groups;
    for (const auto& r : ct.rows) {
        std::vector<std::string> key;
        key.reserve(base + idx.size());
        for (size_t b = 0; b < base; ++b) key.push_back(r.values[b]);
        for (int i : idx) key.push_back(r.values[i]);
        groups[key] += r.count;
    }
    ContingencyTable out;
    out.columns = cols;
    out.target_column = ct.target_column;
    for (auto& [k, c] : groups)
        if (c != 0) out.rows.push_back({k, c});
    return out;
}

}  // namespace

int64_t query_count(const ContingencyTable& ct, const QuerySpec& query) {
    std::vector<int> idx;
    std::vector<std::string> vals;
    std::set<std::string> seen;
    for (const auto& [par_rv, value] : query.conjuncts) {
        if (!seen.insert(par_rv).second)
            fail_validation("query has more than one conjunct for " + par_rv);
        int i = ct.column_index(par_rv);
        if (i < 0) fail_validation("query references " + par_rv + ", not a column of the table");
        idx.push_back(i);
        vals.push_back(value);
    }
    int64_t total = 0;
    for (const auto& r : ct.rows) {
        bool match = true;
        for (size_t k = 0; k < idx.size() && match; ++k)
            match = r.values[idx[k]] == vals[k];
        if (match) total += r.count;
    }
    return total;
}

CountManager::CountManager(const Dataset& dataset, const VDB& vdb, CountBackend& backend,
                           CountConfig config)
    : dataset_(dataset), vdb_(vdb), backend_(backend), config_(config) {}

int64_t CountManager::count(const QuerySpec& query) {
    if (query.conjuncts.empty()) fail_validation("empty query");
    std::vector<std::string> vars;
    for (const auto& [par_rv, value] : query.conjuncts) {
        const auto& dom = vdb_.domain(par_rv);
        if (std::find(dom.begin(), dom.end(), value) == dom.end())
            fail_validation("query value \"" + value + "\" is not in the domain of " + par_rv);
        vars.push_back(par_rv);
    }
    return query_count(completed_ct(vars), query);
}

std::vector<std::string> CountManager::fovars_of(const std::vector<std::string>& var_ids) const {
    std::set<std::string> fos;
    for (const auto& id : var_ids) {
        const ParRV& v = vdb_.par_rv(id);
        fos.insert(v.fo_vars.begin(), v.fo_vars.end());
    }
    return {fos.begin(), fos.end()};
}

int64_t CountManager::population_size(const std::string& fovar_id) const {
    const FOVar* fo = vdb_.find_fovar(fovar_id);
    if (!fo) fail_validation("unknown FOVar: " + fovar_id);
    return static_cast<int64_t>(dataset_.table(fo->entity_table).num_rows());
}

std::vector<GroupRow> CountManager::run_query(const MetaQuery& mq) {
    if (audit_) audit_(mq);
    return backend_.execute(mq);
}

void CountManager::split_vars(const std::vector<std::string>& var_ids,
                              std::vector<std::string>& attrs,
                              std::vector<std::string>& explicit_inds,
                              std::vector<std::string>& all_inds) const {
    std::set<std::string> ind_set;
    for (const auto& id : var_ids) {
        const ParRV& v = vdb_.par_rv(id);
        if (v.kind == ParRVKind::RelationshipIndicator) {
            explicit_inds.push_back(v.id);
            ind_set.insert(v.id);
        } else {
            attrs.push_back(v.id);
            if (v.kind == ParRVKind::RelationshipAttribute) ind_set.insert(v.indicator_id);
        }
    }
    attrs = sorted_unique(attrs);
    explicit_inds = sorted_unique(explicit_inds);
    all_inds.assign(ind_set.begin(), ind_set.end());
}

ContingencyTable CountManager::positive_internal(const std::vector<std::string>& attr_vars,
                                                 const std::vector<std::string>& joined_inds,
                                                 const BuildContext& ctx) {
    MetaQueryOptions opts;
    opts.scope_fovars = ctx.scope;
    opts.joined_relationships = joined_inds;
    opts.restrict_fovar = ctx.restrict_fovar;
    opts.block_fovar = ctx.block_fovar;
    MetaQuery mq = build_metaquery(attr_vars, vdb_, opts);
    std::vector<GroupRow> rows = run_query(mq);

    ContingencyTable ct;
    ct.columns = sorted_unique(attr_vars);
    if (ctx.block_fovar) ct.target_column = block_column_name(*ctx.block_fovar);
    for (auto& gr : rows) {
        if (gr.count == 0) continue;
        ct.rows.push_back({std::move(gr.values), gr.count});
    }
    ct.sort_rows();
    return ct;
}

ContingencyTable CountManager::completed_internal(std::vector<std::string> attr_vars,
                                                  std::vector<std::string> free_inds,
                                                  std::vector<std::string> forced_inds,
                                                  const BuildContext& ctx) {
    attr_vars = sorted_unique(std::move(attr_vars));
    free_inds = sorted_unique(std::move(free_inds));

    if (free_inds.empty()) {
        std::set<std::string> joined(forced_inds.begin(), forced_inds.end());
        for (const auto& a : attr_vars) {
            const ParRV& v = vdb_.par_rv(a);
            if (v.kind == ParRVKind::RelationshipAttribute) joined.insert(v.indicator_id);
        }
        return positive_internal(attr_vars, {joined.begin(), joined.end()}, ctx);
    }

    // Single-pivot subtraction on the last free indicator:
    //   count(R=F, rest) = count(rest, R unconstrained) - count(R=T, rest).
    std::string pivot = free_inds.back();
    free_inds.pop_back();

    std::vector<std::string> pivot_attrs;
    std::vector<std::string> rest_attrs;
    for (const auto& a : attr_vars) {
        if (vdb_.par_rv(a).kind == ParRVKind::RelationshipAttribute &&
            vdb_.par_rv(a).indicator_id == pivot)
            pivot_attrs.push_back(a);
        else
            rest_attrs.push_back(a);
    }

    std::vector<std::string> forced_plus = forced_inds;
    forced_plus.push_back(pivot);
    ContingencyTable ct_true = completed_internal(attr_vars, free_inds, forced_plus, ctx);
    ContingencyTable ct_free = completed_internal(rest_attrs, free_inds, forced_inds, ctx);

    // Output layout: sorted columns over attrs + pivot + remaining free inds.
    std::vector<std::string> out_cols = attr_vars;
    out_cols.push_back(pivot);
    out_cols.insert(out_cols.end(), free_inds.begin(), free_inds.end());
    out_cols = sorted_unique(std::move(out_cols));

    ContingencyTable out;
    out.columns = out_cols;
    out.target_column = ct_true.target_column;
    size_t base = out.target_column.empty() ? 0 : 1;

    auto emit = [&](const ContingencyTable& src, const std::string& pivot_value, int64_t count,
                    const CTRow& row) {
        std::vector<std::string> values(base + out_cols.size());
        for (size_t b = 0; b < base; ++b) values[b] = row.values[b];
        for (size_t i = 0; i < out_cols.size(); ++i) {
            const std::string& col = out_cols[i];
            if (col == pivot) {
                values[base + i] = pivot_value;
            } else if (std::find(pivot_attrs.begin(), pivot_attrs.end(), col) !=
                           pivot_attrs.end() &&
                       pivot_value == "F") {
                values[base + i] = ValuePool::kNA;
            } else {
                int si = src.column_index(col);
                if (si < 0) fail_internal("completion: missing column " + col);
                values[base + i] = row.values[si];
            }
        }
        out.rows.push_back({std::move(values), count});
    };

    for (const auto& r : ct_true.rows) emit(ct_true, "T", r.count, r);

    // Subtract the projection of the true side from the unconstrained side.
    ContingencyTable true_proj = group_onto(ct_true, ct_free.columns);
    std::map<std::vector<std::string>, int64_t> remaining;
    for (const auto& r : ct_free.rows) remaining[r.values] = r.count;
    for (const auto& r : true_proj.rows) {
        auto it = remaining.find(r.values);
        int64_t base_count = it == remaining.end() ? 0 : it->second;
        if (base_count < r.count)
            fail_internal("completion: negative count for pivot " + pivot +
                          " (unconstrained " + std::to_string(base_count) + " < positive " +
                          std::to_string(r.count) + ")");
        it->second = base_count - r.count;
    }
    for (const auto& r : ct_free.rows) {
        int64_t c = remaining[r.values];
        if (c > 0) emit(ct_free, "F", c, r);
    }
    out.sort_rows();
    return out;
}

ContingencyTable CountManager::completed_over(const std::vector<std::string>& var_ids,
                                              std::vector<std::string> scope_fovars,
                                              const BuildContext& partial_ctx) {
    std::vector<std::string> attrs, explicit_inds, all_inds;
    split_vars(var_ids, attrs, explicit_inds, all_inds);

    BuildContext ctx = partial_ctx;
    if (scope_fovars.empty()) scope_fovars = fovars_of(var_ids);
    ctx.scope = sorted_unique(std::move(scope_fovars));
    if (ctx.scope.empty() && !ctx.restrict_fovar && !ctx.block_fovar)
        fail_validation("contingency table request references no FOVar");

    ContingencyTable ct = completed_internal(attrs, all_inds, {}, ctx);
    // Indicators implied by relationship attributes but not requested are
    // grouped away again.
    std::vector<std::string> requested = sorted_unique(var_ids);
    if (ct.columns != requested) ct = group_onto(ct, requested);
    ct.sort_rows();
    return ct;
}

ContingencyTable CountManager::execute_ct(const std::vector<std::string>& var_ids,
                                          std::vector<std::string> scope_fovars) {
    std::vector<std::string> attrs, explicit_inds, all_inds;
    split_vars(var_ids, attrs, explicit_inds, all_inds);
    BuildContext ctx;
    if (scope_fovars.empty()) scope_fovars = fovars_of(var_ids);
    ctx.scope = sorted_unique(std::move(scope_fovars));
    ContingencyTable ct = positive_internal(attrs, all_inds, ctx);

    // Indicator columns are constant T in the positive CT.
    std::vector<std::string> cols = sorted_unique(var_ids);
    ContingencyTable out;
    out.columns = cols;
    for (const auto& r : ct.rows) {
        std::vector<std::string> values(cols.size());
        for (size_t i = 0; i < cols.size(); ++i) {
            int si = ct.column_index(cols[i]);
            values[i] = si >= 0 ? r.values[si] : "T";
        }
        out.rows.push_back({std::move(values), r.count});
    }
    out.sort_rows();
    return out;
}

ContingencyTable CountManager::complete_false_relationships(
    const ContingencyTable& positive, const std::vector<std::string>& var_ids,
    std::vector<std::string> scope_fovars) {
    ContingencyTable expected = execute_ct(var_ids, scope_fovars);
    ContingencyTable given = positive;
    given.sort_rows();
    if (!(given == expected))
        fail_validation(
            "complete_false_relationships: the given table is not the positive CT "
            "for the requested par-RV list");
    return completed_ct(var_ids, std::move(scope_fovars));
}

ContingencyTable CountManager::completed_ct(const std::vector<std::string>& var_ids,
                                            std::vector<std::string> scope_fovars) {
    return completed_over(var_ids, std::move(scope_fovars), BuildContext{});
}

ContingencyTable CountManager::target_ct(const std::vector<std::string>& var_ids,
                                         const std::string& target_fovar,
                                         const std::string& entity_id,
                                         std::vector<std::string> scope_fovars) {
    const FOVar* fo = vdb_.find_fovar(target_fovar);
    if (!fo) fail_validation("unknown FOVar: " + target_fovar);
    uint32_t vid = dataset_.pool().find(entity_id);
    if (vid == ValuePool::kInvalid || dataset_.pk_row(fo->entity_table, vid) == SIZE_MAX)
        fail_validation("unknown " + fo->entity_table + " entity: " + entity_id);
    BuildContext ctx;
    ctx.restrict_fovar = {{target_fovar, entity_id}};
    if (scope_fovars.empty()) {
        scope_fovars = fovars_of(var_ids);
        scope_fovars.push_back(target_fovar);
    }
    return completed_over(var_ids, std::move(scope_fovars), ctx);
}

ContingencyTable CountManager::block_ct(const std::vector<std::string>& var_ids,
                                        const std::string& block_fovar,
                                        std::vector<std::string> scope_fovars) {
    if (!vdb_.find_fovar(block_fovar)) fail_validation("unknown FOVar: " + block_fovar);
    BuildContext ctx;
    ctx.block_fovar = block_fovar;
    if (scope_fovars.empty()) {
        scope_fovars = fovars_of(var_ids);
        scope_fovars.push_back(block_fovar);
    }
    return completed_over(var_ids, std::move(scope_fovars), ctx);
}

const ContingencyTable& CountManager::joint_ct() {
    if (joint_) return *joint_;
    std::vector<std::string> all = vdb_.all_par_rv_ids();
    if (all.empty()) fail_validation("joint CT requested but the VDB has no par-RVs");

    // Row estimate: the joint CT cannot have more rows than either the full
    // domain cross product or the total number of groundings.
    long double by_domains = 1.0L;
    for (const auto& id : all) by_domains *= static_cast<long double>(vdb_.domain(id).size());
    long double by_groundings = 1.0L;
    for (const auto& fo : fovars_of(all))
        by_groundings *= static_cast<long double>(population_size(fo));
    long double estimate = std::min(by_domains, by_groundings);
    if (estimate > static_cast<long double>(config_.max_joint_rows))
        fail_validation("estimated joint CT size exceeds the configured cap (" +
                        std::to_string(config_.max_joint_rows) +
                        " rows); rerun counting in on-demand mode");

    joint_ = completed_ct(all);
    return *joint_;
}

ContingencyTable CountManager::local_ct(const std::vector<std::string>& var_ids) {
    if (!joint_) return completed_ct(var_ids);

    ContingencyTable proj = project_ct(*joint_, var_ids);
    std::set<std::string> kept;
    for (const auto& f : fovars_of(var_ids)) kept.insert(f);
    int64_t divisor = 1;
    for (const auto& f : fovars_of(vdb_.all_par_rv_ids())) {
        if (kept.count(f)) continue;
        int64_t pop = population_size(f);
        if (pop > 0 && divisor > INT64_MAX / pop)
            fail_validation("scope reduction factor overflows; compute the CT directly");
        divisor *= pop;
    }
    if (divisor == 1) return proj;
    for (auto& r : proj.rows) {
        if (r.count % divisor != 0)
            fail_internal("joint CT projection onto a smaller scope does not divide evenly");
        r.count /= divisor;
    }
    return proj;
}

}  // namespace relbn
