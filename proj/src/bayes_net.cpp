#include "relbn/bayes_net.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "relbn/error.hpp"

namespace relbn {

std::vector<std::string> Family::members() const {
    std::vector<std::string> m;
    m.push_back(child);
    m.insert(m.end(), parents.begin(), parents.end());
    return m;
}

BayesNet::BayesNet(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
    std::sort(nodes_.begin(), nodes_.end());
    auto dup = std::adjacent_find(nodes_.begin(), nodes_.end());
    if (dup != nodes_.end()) fail_validation("BayesNet: duplicate node " + *dup);
}

bool BayesNet::has_node(const std::string& n) const {
    return std::binary_search(nodes_.begin(), nodes_.end(), n);
}

bool BayesNet::has_edge(const std::string& parent, const std::string& child) const {
    return edges_.count({parent, child}) > 0;
}

void BayesNet::add_edge(const std::string& parent, const std::string& child) {
    if (!has_node(parent) || !has_node(child))
        fail_validation("BayesNet: edge endpoint is not a node: " + parent + " -> " + child);
    if (parent == child) fail_validation("BayesNet: self-loop on " + parent);
    edges_.insert({parent, child});
}

void BayesNet::remove_edge(const std::string& parent, const std::string& child) {
    if (!edges_.erase({parent, child}))
        fail_validation("BayesNet: no edge " + parent + " -> " + child);
}

std::vector<std::string> BayesNet::parents(const std::string& child) const {
    std::vector<std::string> out;
    for (const auto& [p, c] : edges_)
        if (c == child) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> BayesNet::children(const std::string& parent) const {
    std::vector<std::string> out;
    for (const auto& [p, c] : edges_)
        if (p == parent) out.push_back(c);
    std::sort(out.begin(), out.end());
    return out;
}

Family BayesNet::family(const std::string& child) const {
    return Family{child, parents(child)};
}

bool BayesNet::is_dag() const {
    // Kahn's algorithm.
    std::map<std::string, int> in_degree;
    for (const auto& n : nodes_) in_degree[n] = 0;
    for (const auto& [p, c] : edges_) ++in_degree[c];
    std::deque<std::string> queue;
    for (const auto& [n, d] : in_degree)
        if (d == 0) queue.push_back(n);
    size_t seen = 0;
    while (!queue.empty()) {
        std::string n = queue.front();
        queue.pop_front();
        ++seen;
        for (const auto& [p, c] : edges_)
            if (p == n && --in_degree[c] == 0) queue.push_back(c);
    }
    return seen == nodes_.size();
}

std::set<std::string> BayesNet::ancestors(const std::string& node) const {
    std::set<std::string> out;
    std::deque<std::string> queue{node};
    while (!queue.empty()) {
        std::string n = queue.front();
        queue.pop_front();
        for (const auto& [p, c] : edges_)
            if (c == n && out.insert(p).second) queue.push_back(p);
    }
    return out;
}

}  // namespace relbn
