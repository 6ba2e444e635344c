#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "relbn/bayes_net.hpp"
#include "relbn/model_manager.hpp"
#include "relbn/vdb.hpp"

namespace relbn {

struct LearnerConfig {
    int max_parents = 3;
    int max_iterations = 500;
    bool require_indicator_ancestor = true;
    std::string score = "aic";
    double improvement_epsilon = 1e-9;
    uint64_t seed = 0;  // reserved; the search itself is deterministic
};

struct CandidateOp {
    enum class Kind { AddEdge, DeleteEdge, ReverseEdge };
    Kind kind = Kind::AddEdge;
    std::string parent;
    std::string child;

    // Lexicographic candidate order used for tie-breaking:
    // add-edge < delete-edge < reverse-edge, then parent, then child.
    auto key() const { return std::make_tuple(static_cast<int>(kind), parent, child); }
    std::string describe() const;
};

struct ScoredCandidate {
    CandidateOp op;
    double delta = 0.0;  // total AIC change if applied
};

struct SearchState {
    BayesNet bn;
    std::map<std::string, ScoreRecord> family_scores;
    std::map<std::string, FactorTable> cpts;
    int iteration = 0;

    double total_aic() const;
    double total_loglik() const;
    int64_t total_params() const;
};

// Greedy hill climbing over par-RV DAGs maximizing total AIC, built on the
// generic refine/learn-parameters/argmax seams so other searches can slot in.
class StructureLearner {
public:
    StructureLearner(const VDB& vdb, FamilyCtProvider ct_provider, LearnerConfig config = {},
                     std::ostream* log = nullptr);

    SearchState init() const;  // empty graph over all par-RVs, scored

    // All single-edge operations whose result is a DAG satisfying the
    // constraint set.
    std::vector<CandidateOp> refine_candidates(const SearchState& state) const;

    // Rescores exactly the families whose parent sets the op changes and
    // returns the AIC delta.
    ScoredCandidate learn_parameters(const CandidateOp& op, const SearchState& state) const;

    // Applies the best strictly improving candidate. Returns false when
    // converged (no candidate improves the score).
    bool step(SearchState& state) const;

    SearchState learn() const;

    bool graph_admissible(const BayesNet& bn) const;

private:
    struct FamilyEval {
        ScoreRecord record;
        FactorTable cpt;
    };
    const FamilyEval& eval_family(const Family& family) const;

    const VDB& vdb_;
    FamilyCtProvider ct_provider_;
    LearnerConfig config_;
    std::ostream* log_;
    mutable std::map<std::string, FamilyEval> family_cache_;
};

}  // namespace relbn
