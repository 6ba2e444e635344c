#include "relbn/structure_learner.hpp"

#include <algorithm>

#include "relbn/error.hpp"
#include "relbn/strings.hpp"

namespace relbn {

std::string CandidateOp::describe() const {
    static const char* names[] = {"add-edge", "delete-edge", "reverse-edge"};
    return std::string(names[static_cast<int>(kind)]) + " " + parent + " -> " + child;
}

double SearchState::total_aic() const {
    double t = 0.0;
    for (const auto& [n, r] : family_scores) t += r.aic;
    return t;
}

double SearchState::total_loglik() const {
    double t = 0.0;
    for (const auto& [n, r] : family_scores) t += r.loglikelihood;
    return t;
}

int64_t SearchState::total_params() const {
    int64_t t = 0;
    for (const auto& [n, r] : family_scores) t += r.num_params;
    return t;
}

StructureLearner::StructureLearner(const VDB& vdb, FamilyCtProvider ct_provider,
                                   LearnerConfig config, std::ostream* log)
    : vdb_(vdb), ct_provider_(std::move(ct_provider)), config_(config), log_(log) {
    if (config_.score != "aic")
        fail_validation("unknown score function: " + config_.score + " (supported: aic)");
}

const StructureLearner::FamilyEval& StructureLearner::eval_family(const Family& family) const {
    std::string key = family.child + "|" + pack_values(family.parents);
    auto it = family_cache_.find(key);
    if (it != family_cache_.end()) return it->second;

    ContingencyTable ct = ct_provider_(family);
    FamilyEval eval;
    eval.cpt = estimate_cpt(family, ct, vdb_.domain(family.child), 0.0);
    eval.record.child = family.child;
    eval.record.loglikelihood = family_loglik(eval.cpt, ct);
    eval.record.num_params = count_params(family, vdb_);
    eval.record.aic =
        eval.record.loglikelihood - static_cast<double>(eval.record.num_params);
    return family_cache_.emplace(key, std::move(eval)).first->second;
}

SearchState StructureLearner::init() const {
    SearchState state;
    state.bn = BayesNet(vdb_.all_par_rv_ids());
    for (const auto& node : state.bn.nodes()) {
        const FamilyEval& eval = eval_family(Family{node, {}});
        state.family_scores[node] = eval.record;
        state.cpts[node] = eval.cpt;
    }
    return state;
}

bool StructureLearner::graph_admissible(const BayesNet& bn) const {
    if (!bn.is_dag()) return false;
    for (const auto& node : bn.nodes()) {
        auto parents = bn.parents(node);
        if (static_cast<int>(parents.size()) > config_.max_parents) return false;
    }
    if (config_.require_indicator_ancestor) {
        // A relationship attribute and its indicator may only be connected
        // with the indicator as the parent, and an attribute with any parent
        // must have its indicator among its ancestors; both keep "n/a"
        // predictable from the indicator instead of the other way around.
        for (const auto& v : vdb_.two_variables) {
            if (!bn.has_node(v.id)) continue;
            if (bn.has_edge(v.id, v.indicator_id)) return false;
            if (bn.parents(v.id).empty()) continue;
            auto anc = bn.ancestors(v.id);
            if (!anc.count(v.indicator_id)) return false;
        }
    }
    return true;
}

std::vector<CandidateOp> StructureLearner::refine_candidates(const SearchState& state) const {
    std::vector<CandidateOp> out;
    const auto& nodes = state.bn.nodes();
    using Kind = CandidateOp::Kind;

    auto try_candidate = [&](Kind kind, const std::string& p, const std::string& c) {
        BayesNet next = state.bn;
        switch (kind) {
            case Kind::AddEdge:
                next.add_edge(p, c);
                break;
            case Kind::DeleteEdge:
                next.remove_edge(p, c);
                break;
            case Kind::ReverseEdge:
                next.remove_edge(p, c);
                next.add_edge(c, p);
                break;
        }
        if (graph_admissible(next)) out.push_back({kind, p, c});
    };

    for (const auto& p : nodes)
        for (const auto& c : nodes)
            if (p != c && !state.bn.has_edge(p, c)) try_candidate(Kind::AddEdge, p, c);
    for (const auto& [p, c] : state.bn.edges()) try_candidate(Kind::DeleteEdge, p, c);
    for (const auto& [p, c] : state.bn.edges()) try_candidate(Kind::ReverseEdge, p, c);

    std::sort(out.begin(), out.end(),
              [](const CandidateOp& a, const CandidateOp& b) { return a.key() < b.key(); });
    return out;
}

ScoredCandidate StructureLearner::learn_parameters(const CandidateOp& op,
                                                   const SearchState& state) const {
    using Kind = CandidateOp::Kind;
    // Only families whose parent sets change are rescored: the child family
    // for add/delete, both endpoint families for reverse.
    BayesNet next = state.bn;
    std::vector<std::string> touched;
    switch (op.kind) {
        case Kind::AddEdge:
            next.add_edge(op.parent, op.child);
            touched = {op.child};
            break;
        case Kind::DeleteEdge:
            next.remove_edge(op.parent, op.child);
            touched = {op.child};
            break;
        case Kind::ReverseEdge:
            next.remove_edge(op.parent, op.child);
            next.add_edge(op.child, op.parent);
            touched = {op.child, op.parent};
            break;
    }
    double delta = 0.0;
    for (const auto& node : touched) {
        const FamilyEval& eval = eval_family(next.family(node));
        delta += eval.record.aic - state.family_scores.at(node).aic;
    }
    return {op, delta};
}

bool StructureLearner::step(SearchState& state) const {
    std::optional<ScoredCandidate> best;
    for (const auto& op : refine_candidates(state)) {
        ScoredCandidate sc = learn_parameters(op, state);
        if (sc.delta <= config_.improvement_epsilon) continue;
        if (!best || sc.delta > best->delta ||
            (sc.delta == best->delta && sc.op.key() < best->op.key()))
            best = sc;
    }
    if (!best) return false;

    using Kind = CandidateOp::Kind;
    std::vector<std::string> touched;
    switch (best->op.kind) {
        case Kind::AddEdge:
            state.bn.add_edge(best->op.parent, best->op.child);
            touched = {best->op.child};
            break;
        case Kind::DeleteEdge:
            state.bn.remove_edge(best->op.parent, best->op.child);
            touched = {best->op.child};
            break;
        case Kind::ReverseEdge:
            state.bn.remove_edge(best->op.parent, best->op.child);
            state.bn.add_edge(best->op.child, best->op.parent);
            touched = {best->op.child, best->op.parent};
            break;
    }
    for (const auto& node : touched) {
        const FamilyEval& eval = eval_family(state.bn.family(node));
        state.family_scores[node] = eval.record;
        state.cpts[node] = eval.cpt;
    }
    ++state.iteration;
    if (log_)
        (*log_) << "iteration=" << state.iteration << " op=" << best->op.describe()
                << " delta=" << fmt_double(best->delta)
                << " total_aic=" << fmt_double(state.total_aic()) << "\n";
    return true;
}

SearchState StructureLearner::learn() const {
    SearchState state = init();
    while (state.iteration < config_.max_iterations && step(state)) {
    }
    return state;
}

}  // namespace relbn
