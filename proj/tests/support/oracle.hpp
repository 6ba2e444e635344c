#pragma once

// Brute-force grounding oracles. These deliberately share nothing with the
// metaquery builder, executor, or completion path: every count comes from
// iterating the full cross product of entity populations and evaluating each
// par-RV directly against the raw tables.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relbn/bayes_net.hpp"
#include "relbn/ct.hpp"
#include "relbn/dataset.hpp"
#include "relbn/model_manager.hpp"
#include "relbn/vdb.hpp"

namespace relbn::oracle {

// Evaluates par-RVs over explicit groundings.
class GroundingEvaluator {
public:
    GroundingEvaluator(const Dataset& ds, const VDB& vdb);

    const std::vector<std::string>& population(const std::string& fovar) const;

    // grounding maps FOVar id -> entity key value.
    std::string value(const ParRV& v, const std::map<std::string, std::string>& grounding) const;

    const Dataset& dataset() const { return ds_; }
    const VDB& vdb() const { return vdb_; }

private:
    const Dataset& ds_;
    const VDB& vdb_;
    std::map<std::string, std::vector<std::string>> populations_;   // fovar -> pk values
    std::map<std::string, std::map<std::string, size_t>> pk_rows_;  // table -> pk -> row
    std::map<std::string, std::map<std::string, size_t>> rel_rows_;  // rel par-RV -> pair -> row
};

// Completed CT over var_ids by full enumeration. Scope defaults to the vars'
// FOVars; restrict pins one FOVar to a single entity.
ContingencyTable brute_force_ct(
    const GroundingEvaluator& ev, const std::vector<std::string>& var_ids,
    std::vector<std::string> scope = {},
    const std::optional<std::pair<std::string, std::string>>& restrict_fovar = std::nullopt);

// Log-linear total log-likelihood: per family, iterate the family's own
// grounding space and sum count-free per-grounding ln(cp) terms. When
// `override_target` is set, groundings touching that entity read the given
// label for the target par-RV instead of the stored value.
struct TargetOverride {
    std::string target_par_rv;
    std::string entity_id;
    std::string label;
};
double brute_force_total_loglik(const GroundingEvaluator& ev, const BayesNet& bn,
                                const std::map<std::string, FactorTable>& cpts,
                                const std::optional<TargetOverride>& override_target = std::nullopt);

}  // namespace relbn::oracle
