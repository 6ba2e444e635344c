#pragma once

#include <memory>
#include <string>

#include "relbn/backend.hpp"

namespace relbn {

// Contract-equivalent external backend: the dataset is loaded into a SQLite
// database and rendered metaquery SQL is executed verbatim. The connection
// string is a file path or ":memory:".
class SqliteBackend : public CountBackend {
public:
    SqliteBackend(const Dataset& dataset, const std::string& connection = ":memory:");
    ~SqliteBackend() override;

    std::vector<GroupRow> execute(const MetaQuery& mq) override;
    std::string name() const override { return "sqlite"; }

    // Runs arbitrary rendered SQL and returns rows with the first column as
    // the count. Used by the renderer contract tests.
    std::vector<GroupRow> execute_sql(const std::string& sql);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace relbn
