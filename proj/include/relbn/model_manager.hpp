#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "relbn/bayes_net.hpp"
#include "relbn/ct.hpp"
#include "relbn/vdb.hpp"

namespace relbn {

// Conditional probability table for one family. Rows exist only for
// (child value, parent config) pairs with positive data count; lookups of
// unseen pairs fall back to the pseudo-count estimate when alpha > 0.
class FactorTable {
public:
    struct Row {
        std::string child_value;
        std::vector<std::string> parent_values;  // family parent order
        double cp = 0.0;
    };

    Family family;
    std::vector<std::string> child_domain;
    double alpha = 0.0;
    std::vector<Row> rows;  // sorted by (parent_values, child_value)

    // Conditional probability of child_value given the parent configuration,
    // including the smoothing fallback for unstored rows.
    double lookup(const std::string& child_value,
                  const std::vector<std::string>& parent_values) const;

    void rebuild_index();  // after filling rows / loading from disk

    int64_t parent_config_count(const std::vector<std::string>& parent_values) const;

private:
    friend FactorTable estimate_cpt(const Family&, const ContingencyTable&,
                                    const std::vector<std::string>&, double);
    std::unordered_map<std::string, double> cp_index_;
    std::unordered_map<std::string, int64_t> parent_totals_;
};

struct ScoreRecord {
    std::string child;
    double loglikelihood = 0.0;
    int64_t num_params = 0;
    double aic = 0.0;  // always loglikelihood - num_params
};

struct ModelScores {
    std::vector<ScoreRecord> per_family;  // sorted by child
    double total_loglikelihood = 0.0;
    int64_t total_params = 0;
    double total_aic = 0.0;
};

// Maximum likelihood estimation: cp(child=v | parents=u) is the observed
// frequency, with optional pseudo-count alpha.
FactorTable estimate_cpt(const Family& family, const ContingencyTable& ct,
                         const std::vector<std::string>& child_domain, double alpha = 0.0);

// Free parameters of a family: product of parent domain sizes times
// (child domain size - 1).
int64_t count_params(const Family& family, const VDB& vdb);

// Sum over the family CT of count * ln(cp).
double family_loglik(const FactorTable& cpt, const ContingencyTable& ct);

using FamilyCtProvider = std::function<ContingencyTable(const Family&)>;

ModelScores score_model(const BayesNet& bn, const FamilyCtProvider& ct_provider, const VDB& vdb,
                        double alpha = 0.0);

// The model database on disk: structure, parameter estimates, and scores.
struct Mdb {
    BayesNet bn;
    std::map<std::string, FactorTable> cpts;  // node -> CPT
    ModelScores scores;
};

void persist_mdb(const Mdb& mdb, const std::string& dir);
Mdb load_mdb(const std::string& dir);

}  // namespace relbn
