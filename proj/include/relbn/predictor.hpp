#pragma once

#include <map>
#include <string>
#include <vector>

#include "relbn/bayes_net.hpp"
#include "relbn/count_manager.hpp"
#include "relbn/model_manager.hpp"

namespace relbn {

struct PredictionTask {
    std::string target_par_rv;  // an entity-attribute par-RV id
    std::string entity_id;
};

struct Prediction {
    std::vector<std::string> labels;  // target domain order
    std::vector<double> probabilities;

    double prob(const std::string& label) const;
    // Highest-probability label; ties broken by the lexicographically
    // smallest label.
    std::string argmax() const;
};

struct TestInstance {
    std::string target_par_rv;
    std::string entity_id;
    std::string true_label;
};

struct InstanceResult {
    TestInstance instance;
    bool skipped = false;
    std::string skip_reason;
    Prediction prediction;  // empty when skipped
    std::string predicted;
    double prob_true = 0.0;
    bool correct = false;
};

struct EvalReport {
    double cll = 0.0;       // mean ln p(true label) over evaluated instances
    double accuracy = 0.0;  // fraction argmax-correct
    size_t evaluated = 0;
    size_t skipped = 0;
    std::vector<InstanceResult> rows;
};

struct BenchReport {
    size_t instances = 0;
    double single_seconds = 0.0;
    double block_seconds = 0.0;
    double speedup = 0.0;  // single / block
};

// Class probabilities for ground target atoms via the log-linear score:
// only the families whose counts depend on the target entity are evaluated,
// over contingency tables restricted to that entity; the normalizer cancels.
class Predictor {
public:
    Predictor(const VDB& vdb, const BayesNet& bn, const std::map<std::string, FactorTable>& cpts,
              CountManager& counts);

    Prediction predict(const PredictionTask& task) const;  // single access path

    // Block access: one stacked contingency table per family for all ids.
    std::map<std::string, Prediction> predict_block(const std::string& target_par_rv,
                                                    const std::vector<std::string>& ids) const;

    EvalReport evaluate(const std::vector<TestInstance>& instances, bool blocked = true) const;

    // Asserts blocked and single outputs agree, then times both paths.
    BenchReport benchmark_block_vs_single(const std::vector<TestInstance>& instances) const;

private:
    const ParRV& validated_target(const std::string& target_par_rv) const;
    std::vector<Family> relevant_families(const std::string& target_par_rv) const;
    void accumulate(const FactorTable& ft, const ContingencyTable& slice,
                    const std::string& target_par_rv, const std::vector<std::string>& labels,
                    std::vector<double>& scores) const;
    Prediction normalize(const std::vector<std::string>& labels,
                         const std::vector<double>& scores) const;

    const VDB& vdb_;
    const BayesNet& bn_;
    const std::map<std::string, FactorTable>& cpts_;
    CountManager& counts_;
};

std::vector<TestInstance> load_test_split(const std::string& path);
void save_test_split(const std::vector<TestInstance>& instances, const std::string& path);

}  // namespace relbn
