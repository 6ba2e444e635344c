#include "relbn/predictor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "relbn/csv.hpp"
#include "relbn/error.hpp"

namespace relbn {

double Prediction::prob(const std::string& label) const {
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return probabilities[i];
    fail_validation("label " + label + " is not in the target domain");
}

std::string Prediction::argmax() const {
    size_t best = 0;
    for (size_t i = 1; i < labels.size(); ++i) {
        if (probabilities[i] > probabilities[best] ||
            (probabilities[i] == probabilities[best] && labels[i] < labels[best]))
            best = i;
    }
    return labels[best];
}

Predictor::Predictor(const VDB& vdb, const BayesNet& bn,
                     const std::map<std::string, FactorTable>& cpts, CountManager& counts)
    : vdb_(vdb), bn_(bn), cpts_(cpts), counts_(counts) {}

const ParRV& Predictor::validated_target(const std::string& target_par_rv) const {
    const ParRV& target = vdb_.par_rv(target_par_rv);
    if (target.kind != ParRVKind::EntityAttribute)
        fail_validation("prediction targets must be entity attributes; " + target_par_rv +
                        " is not");
    if (!bn_.has_node(target_par_rv))
        fail_validation("target " + target_par_rv + " is not a node of the model");
    // With a same-functor duplicate par-RV in the model (self-relationship
    // schemas), groundings of the duplicate also touch the target atom and
    // the family rule below would miss them.
    for (const auto& node : bn_.nodes()) {
        if (node == target_par_rv) continue;
        const ParRV* v = vdb_.find_par_rv(node);
        if (v && v->functor_name == target.functor_name)
            fail_validation("prediction for " + target_par_rv +
                            " is unsupported: the model also contains " + node +
                            " over the same functor");
    }
    return target;
}

std::vector<Family> Predictor::relevant_families(const std::string& target_par_rv) const {
    // The target's own family plus every family with the target as a parent;
    // all other families contribute the same term to every label.
    std::vector<Family> fams;
    fams.push_back(bn_.family(target_par_rv));
    for (const auto& node : bn_.nodes()) {
        if (node == target_par_rv) continue;
        Family fam = bn_.family(node);
        if (std::find(fam.parents.begin(), fam.parents.end(), target_par_rv) !=
            fam.parents.end())
            fams.push_back(std::move(fam));
    }
    return fams;
}

void Predictor::accumulate(const FactorTable& ft, const ContingencyTable& slice,
                           const std::string& target_par_rv,
                           const std::vector<std::string>& labels,
                           std::vector<double>& scores) const {
    const Family& fam = ft.family;
    int child_col = fam.child == target_par_rv ? -1 : slice.column_index(fam.child);
    std::vector<int> parent_cols(fam.parents.size());
    for (size_t i = 0; i < fam.parents.size(); ++i)
        parent_cols[i] =
            fam.parents[i] == target_par_rv ? -1 : slice.column_index(fam.parents[i]);

    std::vector<std::string> parent_values(fam.parents.size());
    for (const auto& row : slice.rows) {
        for (size_t li = 0; li < labels.size(); ++li) {
            const std::string& child_value =
                child_col < 0 ? labels[li] : row.values[child_col];
            for (size_t i = 0; i < parent_values.size(); ++i)
                parent_values[i] =
                    parent_cols[i] < 0 ? labels[li] : row.values[parent_cols[i]];
            double cp = ft.lookup(child_value, parent_values);
            scores[li] += static_cast<double>(row.count) * std::log(cp);
        }
    }
}

Prediction Predictor::normalize(const std::vector<std::string>& labels,
                                const std::vector<double>& scores) const {
    double best = -std::numeric_limits<double>::infinity();
    for (double s : scores) best = std::max(best, s);
    if (!std::isfinite(best))
        fail_validation(
            "every candidate label has probability zero; rerun prediction with "
            "Laplace smoothing (alpha > 0)");
    Prediction pred;
    pred.labels = labels;
    pred.probabilities.resize(labels.size());
    double z = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        double e = std::exp(scores[i] - best);
        pred.probabilities[i] = e;
        z += e;
    }
    for (double& p : pred.probabilities) p /= z;
    return pred;
}

Prediction Predictor::predict(const PredictionTask& task) const {
    const ParRV& target = validated_target(task.target_par_rv);
    const std::string& target_fovar = target.fo_vars[0];
    const std::vector<std::string>& labels = vdb_.domain(target.id);

    std::vector<double> scores(labels.size(), 0.0);
    for (const Family& fam : relevant_families(target.id)) {
        std::vector<std::string> vars;
        for (const auto& m : fam.members())
            if (m != target.id) vars.push_back(m);
        std::vector<std::string> scope = counts_.fovars_of(fam.members());
        ContingencyTable slice = counts_.target_ct(vars, target_fovar, task.entity_id, scope);
        accumulate(cpts_.at(fam.child), slice, target.id, labels, scores);
    }
    return normalize(labels, scores);
}

std::map<std::string, Prediction> Predictor::predict_block(
    const std::string& target_par_rv, const std::vector<std::string>& ids) const {
    const ParRV& target = validated_target(target_par_rv);
    const std::string& target_fovar = target.fo_vars[0];
    const std::vector<std::string>& labels = vdb_.domain(target.id);

    // Validate ids against the population.
    for (const auto& id : ids) {
        uint32_t vid = counts_.dataset().pool().find(id);
        const FOVar* fo = vdb_.find_fovar(target_fovar);
        if (vid == ValuePool::kInvalid ||
            counts_.dataset().pk_row(fo->entity_table, vid) == SIZE_MAX)
            fail_validation("unknown " + fo->entity_table + " entity: " + id);
    }

    std::map<std::string, std::vector<double>> scores;
    for (const auto& id : ids) scores[id].assign(labels.size(), 0.0);

    for (const Family& fam : relevant_families(target.id)) {
        std::vector<std::string> vars;
        for (const auto& m : fam.members())
            if (m != target.id) vars.push_back(m);
        std::vector<std::string> scope = counts_.fovars_of(fam.members());
        ContingencyTable block = counts_.block_ct(vars, target_fovar, scope);
        const FactorTable& ft = cpts_.at(fam.child);
        std::map<std::string, ContingencyTable> slices;
        for (auto& [id, slice] : split_block_ct(block)) slices[id] = std::move(slice);
        for (const auto& id : ids) {
            auto it = slices.find(id);
            if (it == slices.end())
                fail_internal("block CT is missing the slice for entity " + id);
            accumulate(ft, it->second, target.id, labels, scores[id]);
        }
    }
    std::map<std::string, Prediction> out;
    for (const auto& id : ids)
        if (!out.count(id)) out[id] = normalize(labels, scores[id]);
    return out;
}

EvalReport Predictor::evaluate(const std::vector<TestInstance>& instances, bool blocked) const {
    EvalReport report;
    report.rows.reserve(instances.size());

    // Pre-validate each instance; invalid ones are skipped with a warning row.
    std::vector<size_t> valid;
    for (size_t i = 0; i < instances.size(); ++i) {
        const TestInstance& inst = instances[i];
        InstanceResult res;
        res.instance = inst;
        std::string reason;
        const ParRV* target = vdb_.find_par_rv(inst.target_par_rv);
        if (!target) {
            reason = "unknown target par-RV";
        } else if (target->kind != ParRVKind::EntityAttribute) {
            reason = "target is not an entity attribute";
        } else {
            const FOVar* fo = vdb_.find_fovar(target->fo_vars[0]);
            uint32_t vid = counts_.dataset().pool().find(inst.entity_id);
            if (vid == ValuePool::kInvalid ||
                counts_.dataset().pk_row(fo->entity_table, vid) == SIZE_MAX) {
                reason = "unknown entity " + inst.entity_id;
            } else {
                const auto& dom = vdb_.domain(target->id);
                if (std::find(dom.begin(), dom.end(), inst.true_label) == dom.end())
                    reason = "label " + inst.true_label + " not in the target domain";
            }
        }
        if (!reason.empty()) {
            res.skipped = true;
            res.skip_reason = reason;
            ++report.skipped;
            report.rows.push_back(std::move(res));
        } else {
            valid.push_back(i);
            report.rows.push_back(std::move(res));
        }
    }

    // Predictions, blocked by target par-RV by default.
    std::map<size_t, Prediction> preds;
    if (blocked) {
        std::map<std::string, std::vector<size_t>> by_target;
        for (size_t i : valid) by_target[instances[i].target_par_rv].push_back(i);
        for (const auto& [target, idxs] : by_target) {
            std::set<std::string> id_set;
            for (size_t i : idxs) id_set.insert(instances[i].entity_id);
            auto block = predict_block(target, {id_set.begin(), id_set.end()});
            for (size_t i : idxs) preds[i] = block.at(instances[i].entity_id);
        }
    } else {
        for (size_t i : valid)
            preds[i] = predict({instances[i].target_par_rv, instances[i].entity_id});
    }

    double cll_sum = 0.0;
    size_t correct = 0;
    for (size_t i : valid) {
        InstanceResult& res = report.rows[i];
        res.prediction = std::move(preds.at(i));
        res.predicted = res.prediction.argmax();
        res.prob_true = res.prediction.prob(instances[i].true_label);
        res.correct = res.predicted == instances[i].true_label;
        cll_sum += std::log(res.prob_true);
        if (res.correct) ++correct;
    }
    report.evaluated = valid.size();
    if (report.evaluated > 0) {
        report.cll = cll_sum / static_cast<double>(report.evaluated);
        report.accuracy = static_cast<double>(correct) / static_cast<double>(report.evaluated);
    }
    return report;
}

BenchReport Predictor::benchmark_block_vs_single(
    const std::vector<TestInstance>& instances) const {
    // Gate: both access paths must produce identical outputs before any
    // timing is reported.
    EvalReport single_report = evaluate(instances, /*blocked=*/false);
    EvalReport block_report = evaluate(instances, /*blocked=*/true);
    if (single_report.evaluated != block_report.evaluated ||
        single_report.skipped != block_report.skipped)
        fail_internal("benchmark gate: access paths evaluated different instance sets");
    for (size_t i = 0; i < single_report.rows.size(); ++i) {
        const auto& a = single_report.rows[i];
        const auto& b = block_report.rows[i];
        if (a.skipped != b.skipped || std::abs(a.prob_true - b.prob_true) > 1e-9 ||
            a.predicted != b.predicted)
            fail_internal("benchmark gate: blocked and single predictions disagree on " +
                          a.instance.target_par_rv + " / " + a.instance.entity_id);
    }

    BenchReport report;
    report.instances = instances.size();
    auto now = [] { return std::chrono::steady_clock::now(); };
    auto seconds = [](auto dt) {
        return std::chrono::duration_cast<std::chrono::duration<double>>(dt).count();
    };

    auto t0 = now();
    evaluate(instances, /*blocked=*/false);
    report.single_seconds = seconds(now() - t0);

    auto t1 = now();
    evaluate(instances, /*blocked=*/true);
    report.block_seconds = seconds(now() - t1);

    report.speedup =
        report.block_seconds > 0.0 ? report.single_seconds / report.block_seconds : 0.0;
    return report;
}

std::vector<TestInstance> load_test_split(const std::string& path) {
    csv::Table t = csv::read_file(path);
    if (t.header != std::vector<std::string>{"target_par_rv", "entity_id", "true_label"})
        fail_validation("test split " + path +
                        " must have columns target_par_rv,entity_id,true_label");
    std::vector<TestInstance> out;
    for (const auto& row : t.rows) out.push_back({row[0], row[1], row[2]});
    return out;
}

void save_test_split(const std::vector<TestInstance>& instances, const std::string& path) {
    csv::Table t;
    t.header = {"target_par_rv", "entity_id", "true_label"};
    for (const auto& i : instances) t.rows.push_back({i.target_par_rv, i.entity_id, i.true_label});
    csv::write_file(path, t);
}

}  // namespace relbn
