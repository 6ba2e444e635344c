#pragma once

#include <set>
#include <string>
#include <vector>

namespace relbn {

// A child node together with all its parents: the scope of one factor.
struct Family {
    std::string child;
    std::vector<std::string> parents;  // sorted, distinct, child excluded

    std::vector<std::string> members() const;  // child + parents
    bool operator==(const Family&) const = default;
};

// Directed graph over par-RV ids. Edge operations do not enforce acyclicity;
// callers check is_dag() (the learner filters candidates that way).
class BayesNet {
public:
    BayesNet() = default;
    explicit BayesNet(std::vector<std::string> nodes);

    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::set<std::pair<std::string, std::string>>& edges() const { return edges_; }

    bool has_node(const std::string& n) const;
    bool has_edge(const std::string& parent, const std::string& child) const;
    void add_edge(const std::string& parent, const std::string& child);
    void remove_edge(const std::string& parent, const std::string& child);

    std::vector<std::string> parents(const std::string& child) const;
    std::vector<std::string> children(const std::string& parent) const;
    Family family(const std::string& child) const;

    bool is_dag() const;
    std::set<std::string> ancestors(const std::string& node) const;

    bool operator==(const BayesNet&) const = default;

private:
    std::vector<std::string> nodes_;  // sorted
    std::set<std::pair<std::string, std::string>> edges_;  // (parent, child)
};

}  // namespace relbn
