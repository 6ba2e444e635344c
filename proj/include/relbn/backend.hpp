#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relbn/dataset.hpp"
#include "relbn/metaquery.hpp"

namespace relbn {

// One group-by result row: the non-count select outputs, in select order.
struct GroupRow {
    std::vector<std::string> values;
    int64_t count = 0;
};

class CountBackend {
public:
    virtual ~CountBackend() = default;
    // Runs the count query. Zero-count combinations are omitted. Row order is
    // unspecified; callers sort.
    virtual std::vector<GroupRow> execute(const MetaQuery& mq) = 0;
    virtual std::string name() const = 0;
};

// In-memory executor over the loaded dataset: hash joins between aliased
// tables plus hash group-by. Disconnected parts of the join graph are
// evaluated independently and combined by multiplying counts, so cross
// products are never materialized row by row.
class BuiltinBackend : public CountBackend {
public:
    explicit BuiltinBackend(const Dataset& dataset) : dataset_(dataset) {}
    std::vector<GroupRow> execute(const MetaQuery& mq) override;
    std::string name() const override { return "builtin"; }

private:
    const Dataset& dataset_;
};

}  // namespace relbn
