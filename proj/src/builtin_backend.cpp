#include "relbn/backend.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "relbn/error.hpp"

namespace relbn {

namespace {

struct AliasState {
    std::string alias;
    const LoadedTable* table = nullptr;
    size_t bound_row = SIZE_MAX;
};

struct LiteralCond {
    int alias_idx;
    int col;
    uint32_t value;  // ValuePool::kInvalid when the literal is not in the data
};

struct JoinCond {
    int left_alias, left_col;
    int right_alias, right_col;
};

using GroupMap = std::unordered_map<std::string, int64_t>;

}  // namespace

std::vector<GroupRow> BuiltinBackend::execute(const MetaQuery& mq) {
    // Resolve aliases and columns.
    std::vector<AliasState> aliases;
    std::map<std::string, int> alias_idx;
    for (const auto& [table_name, alias] : mq.from_list) {
        const LoadedTable* t = dataset_.find_table(table_name);
        if (!t) fail_validation("executor: unknown table " + table_name);
        if (alias_idx.count(alias)) fail_validation("executor: duplicate alias " + alias);
        alias_idx[alias] = static_cast<int>(aliases.size());
        aliases.push_back({alias, t, SIZE_MAX});
    }
    auto resolve = [&](const ColumnRef& c) -> std::pair<int, int> {
        auto it = alias_idx.find(c.table_alias);
        if (it == alias_idx.end())
            fail_validation("executor: condition references unknown alias " + c.table_alias);
        int col = aliases[it->second].table->column_index(c.column);
        if (col < 0)
            fail_validation("executor: no column " + c.column + " in alias " + c.table_alias);
        return {it->second, col};
    };

    std::vector<LiteralCond> literals;
    std::vector<JoinCond> joins;
    for (const auto& c : mq.where_list) {
        auto [la, lc] = resolve(c.left);
        if (c.right_is_literal) {
            literals.push_back({la, lc, dataset_.pool().find(c.literal)});
        } else {
            auto [ra, rc] = resolve(c.right);
            joins.push_back({la, lc, ra, rc});
        }
    }

    struct SelectCol {
        int alias_idx;
        int col;
        size_t output_pos;  // position among non-count outputs
    };
    std::vector<SelectCol> select_cols;
    {
        size_t pos = 0;
        for (const auto& e : mq.select_list) {
            if (e.is_count) continue;
            auto [a, c] = resolve(e.col);
            select_cols.push_back({a, c, pos++});
        }
    }

    // Connected components of the join graph.
    std::vector<int> comp(aliases.size());
    for (size_t i = 0; i < comp.size(); ++i) comp[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int x) {
        while (comp[x] != x) x = comp[x] = comp[comp[x]];
        return x;
    };
    for (const auto& j : joins) comp[find(j.left_alias)] = find(j.right_alias);
    std::map<int, std::vector<int>> members;  // root -> alias indexes
    for (size_t i = 0; i < aliases.size(); ++i) members[find(static_cast<int>(i))].push_back(i);

    // Lazy per-execution hash indexes: (alias, columns) -> value tuple -> rows.
    std::map<std::pair<int, std::vector<int>>,
             std::unordered_map<std::string, std::vector<size_t>>>
        indexes;
    auto get_index = [&](int a, const std::vector<int>& cols)
        -> const std::unordered_map<std::string, std::vector<size_t>>& {
        auto key = std::make_pair(a, cols);
        auto it = indexes.find(key);
        if (it != indexes.end()) return it->second;
        auto& idx = indexes[key];
        const auto& rows = aliases[a].table->rows;
        std::vector<uint32_t> vals(cols.size());
        for (size_t r = 0; r < rows.size(); ++r) {
            for (size_t k = 0; k < cols.size(); ++k) vals[k] = rows[r][cols[k]];
            idx[LoadedTable::pack_key(vals)].push_back(r);
        }
        return idx;
    };

    struct ComponentResult {
        std::vector<size_t> output_positions;
        GroupMap groups;
    };
    std::vector<ComponentResult> results;

    for (auto& [root, comp_aliases] : members) {
        // Enumeration order: literal-restricted aliases first, then aliases
        // joined to already-placed ones; alphabetical tie-break.
        std::vector<int> order;
        std::set<int> placed;
        auto is_restricted = [&](int a) {
            return std::any_of(literals.begin(), literals.end(),
                               [&](const LiteralCond& l) { return l.alias_idx == a; });
        };
        auto joined_to_placed = [&](int a) {
            return std::any_of(joins.begin(), joins.end(), [&](const JoinCond& j) {
                return (j.left_alias == a && placed.count(j.right_alias)) ||
                       (j.right_alias == a && placed.count(j.left_alias));
            });
        };
        while (order.size() < comp_aliases.size()) {
            int best = -1;
            int best_rank = 3;
            for (int a : comp_aliases) {
                if (placed.count(a)) continue;
                int rank = is_restricted(a) ? 0 : (joined_to_placed(a) ? 1 : 2);
                if (rank < best_rank ||
                    (rank == best_rank && (best < 0 || aliases[a].alias < aliases[best].alias))) {
                    best = a;
                    best_rank = rank;
                }
            }
            order.push_back(best);
            placed.insert(best);
        }

        ComponentResult res;
        std::vector<SelectCol> comp_selects;
        for (const auto& s : select_cols)
            if (find(s.alias_idx) == root) {
                comp_selects.push_back(s);
                res.output_positions.push_back(s.output_pos);
            }

        // Recursive hash-join enumeration over the ordered aliases.
        std::vector<uint32_t> key(comp_selects.size());
        std::function<void(size_t, int64_t&)> enumerate = [&](size_t depth, int64_t& leaves) {
            if (depth == order.size()) {
                for (size_t k = 0; k < comp_selects.size(); ++k)
                    key[k] =
                        aliases[comp_selects[k].alias_idx]
                            .table->rows[aliases[comp_selects[k].alias_idx].bound_row]
                                        [comp_selects[k].col];
                res.groups[LoadedTable::pack_key(key)] += 1;
                ++leaves;
                return;
            }
            int a = order[depth];
            // Gather equality constraints on this alias from literals and
            // from joins whose other side is already bound.
            std::vector<int> cols;
            std::vector<uint32_t> vals;
            bool impossible = false;
            for (const auto& l : literals)
                if (l.alias_idx == a) {
                    if (l.value == ValuePool::kInvalid) impossible = true;
                    cols.push_back(l.col);
                    vals.push_back(l.value);
                }
            for (const auto& j : joins) {
                if (j.left_alias == a && aliases[j.right_alias].bound_row != SIZE_MAX) {
                    cols.push_back(j.left_col);
                    vals.push_back(
                        aliases[j.right_alias].table->rows[aliases[j.right_alias].bound_row]
                                                          [j.right_col]);
                } else if (j.right_alias == a && aliases[j.left_alias].bound_row != SIZE_MAX) {
                    cols.push_back(j.right_col);
                    vals.push_back(
                        aliases[j.left_alias].table->rows[aliases[j.left_alias].bound_row]
                                                         [j.left_col]);
                }
            }
            if (impossible) return;

            if (cols.empty()) {
                for (size_t r = 0; r < aliases[a].table->num_rows(); ++r) {
                    aliases[a].bound_row = r;
                    enumerate(depth + 1, leaves);
                }
                aliases[a].bound_row = SIZE_MAX;
                return;
            }
            // Canonical column order for the index key.
            std::vector<size_t> perm(cols.size());
            for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
            std::sort(perm.begin(), perm.end(), [&](size_t x, size_t y) { return cols[x] < cols[y]; });
            std::vector<int> sorted_cols;
            std::vector<uint32_t> sorted_vals;
            for (size_t i : perm) {
                if (!sorted_cols.empty() && sorted_cols.back() == cols[i]) {
                    if (sorted_vals.back() != vals[i]) return;  // conflicting constraints
                    continue;
                }
                sorted_cols.push_back(cols[i]);
                sorted_vals.push_back(vals[i]);
            }
            const auto& idx = get_index(a, sorted_cols);
            auto it = idx.find(LoadedTable::pack_key(sorted_vals));
            if (it == idx.end()) return;
            for (size_t r : it->second) {
                aliases[a].bound_row = r;
                enumerate(depth + 1, leaves);
            }
            aliases[a].bound_row = SIZE_MAX;
        };
        int64_t leaves = 0;
        enumerate(0, leaves);
        results.push_back(std::move(res));
    }

    // Combine components: cross product of group maps, counts multiplied.
    size_t n_outputs = select_cols.size();
    GroupMap combined{{std::string(), 1}};
    std::vector<size_t> combined_positions;
    for (const auto& res : results) {
        GroupMap next;
        for (const auto& [k1, c1] : combined)
            for (const auto& [k2, c2] : res.groups) next[k1 + k2] += c1 * c2;
        combined = std::move(next);
        combined_positions.insert(combined_positions.end(), res.output_positions.begin(),
                                  res.output_positions.end());
        if (combined.empty()) break;
    }

    std::vector<GroupRow> out;
    out.reserve(combined.size());
    for (const auto& [packed, count] : combined) {
        GroupRow row;
        row.count = count;
        row.values.resize(n_outputs);
        for (size_t i = 0; i < combined_positions.size(); ++i) {
            uint32_t id;
            std::memcpy(&id, packed.data() + i * sizeof(uint32_t), sizeof(uint32_t));
            row.values[combined_positions[i]] = dataset_.pool().str(id);
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace relbn
