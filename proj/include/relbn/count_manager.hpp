#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relbn/backend.hpp"
#include "relbn/ct.hpp"
#include "relbn/dataset.hpp"
#include "relbn/metaquery.hpp"
#include "relbn/vdb.hpp"

namespace relbn {

struct CountConfig {
    int64_t max_joint_rows = 10'000'000;
};

// A conjunctive count query: (par-RV = value) pairs, at most one per par-RV.
struct QuerySpec {
    std::vector<std::pair<std::string, std::string>> conjuncts;
};

// Number of groundings satisfying every conjunct within the table.
int64_t query_count(const ContingencyTable& ct, const QuerySpec& query);

// Builds metaqueries from VDB metadata, executes them through a backend,
// completes the results with false-relationship counts, and serves local
// contingency tables from the cached joint table.
class CountManager {
public:
    CountManager(const Dataset& dataset, const VDB& vdb, CountBackend& backend,
                 CountConfig config = {});

    // Called with every metaquery handed to the backend (SQL audit trail).
    void set_audit(std::function<void(const MetaQuery&)> audit) { audit_ = std::move(audit); }

    std::vector<std::string> fovars_of(const std::vector<std::string>& var_ids) const;
    int64_t population_size(const std::string& fovar_id) const;

    // Positive-relationship CT over vars: counts the groundings where every
    // indicator among vars holds; indicator columns are constant "T".
    ContingencyTable execute_ct(const std::vector<std::string>& var_ids,
                                std::vector<std::string> scope_fovars = {});

    // Extends a positive CT with indicator=F rows by iterative single-pivot
    // subtraction. `positive` must be the positive CT for var_ids.
    ContingencyTable complete_false_relationships(const ContingencyTable& positive,
                                                  const std::vector<std::string>& var_ids,
                                                  std::vector<std::string> scope_fovars = {});

    // Completed CT over vars. Scope defaults to the vars' own FOVars; a wider
    // scope multiplies counts over the extra populations.
    ContingencyTable completed_ct(const std::vector<std::string>& var_ids,
                                  std::vector<std::string> scope_fovars = {});

    // Completed CT restricted to one entity of a FOVar (single target access).
    ContingencyTable target_ct(const std::vector<std::string>& var_ids,
                               const std::string& target_fovar, const std::string& entity_id,
                               std::vector<std::string> scope_fovars = {});

    // Completed block CT: one slice per entity of the FOVar's population,
    // produced by adding the entity id to the select and group-by lists.
    ContingencyTable block_ct(const std::vector<std::string>& var_ids,
                              const std::string& block_fovar,
                              std::vector<std::string> scope_fovars = {});

    // Completed CT over every par-RV in the VDB, cached for the session.
    const ContingencyTable& joint_ct();
    bool has_joint() const { return joint_.has_value(); }
    void set_joint(ContingencyTable ct) { joint_ = std::move(ct); }

    // CT over vars at their own scope, served from the cached joint CT by
    // group-by projection plus exact division by the dropped populations.
    // Falls back to direct computation when no joint CT is cached.
    ContingencyTable local_ct(const std::vector<std::string>& var_ids);

    // Count of a conjunctive query over the completed CT of its par-RVs.
    int64_t count(const QuerySpec& query);

    const VDB& vdb() const { return vdb_; }
    const Dataset& dataset() const { return dataset_; }

private:
    struct BuildContext {
        std::vector<std::string> scope;
        std::optional<std::pair<std::string, std::string>> restrict_fovar;
        std::optional<std::string> block_fovar;
    };

    std::vector<GroupRow> run_query(const MetaQuery& mq);
    ContingencyTable positive_internal(const std::vector<std::string>& attr_vars,
                                       const std::vector<std::string>& joined_inds,
                                       const BuildContext& ctx);
    ContingencyTable completed_internal(std::vector<std::string> attr_vars,
                                        std::vector<std::string> free_inds,
                                        std::vector<std::string> forced_inds,
                                        const BuildContext& ctx);
    ContingencyTable completed_over(const std::vector<std::string>& var_ids,
                                    std::vector<std::string> scope_fovars,
                                    const BuildContext& partial_ctx);
    void split_vars(const std::vector<std::string>& var_ids, std::vector<std::string>& attrs,
                    std::vector<std::string>& explicit_inds,
                    std::vector<std::string>& all_inds) const;

    const Dataset& dataset_;
    const VDB& vdb_;
    CountBackend& backend_;
    CountConfig config_;
    std::function<void(const MetaQuery&)> audit_;
    std::optional<ContingencyTable> joint_;
};

}  // namespace relbn
