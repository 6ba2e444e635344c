#include "relbn/sqlite_backend.hpp"

#include <sqlite3.h>

#include "relbn/error.hpp"

namespace relbn {

namespace {

std::string quote_ident(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace

struct SqliteBackend::Impl {
    sqlite3* db = nullptr;

    void exec(const std::string& sql) {
        char* err = nullptr;
        if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "unknown sqlite error";
            sqlite3_free(err);
            fail_validation("sqlite: " + msg + " while executing: " + sql);
        }
    }
};

SqliteBackend::SqliteBackend(const Dataset& dataset, const std::string& connection)
    : impl_(std::make_unique<Impl>()) {
    if (sqlite3_open(connection.c_str(), &impl_->db) != SQLITE_OK)
        fail_validation("sqlite: cannot open " + connection);

    impl_->exec("BEGIN;");
    for (const auto& def : dataset.manifest().tables) {
        std::string create = "CREATE TABLE " + quote_ident(def.name) + " (";
        for (size_t i = 0; i < def.columns.size(); ++i) {
            if (i) create += ", ";
            create += quote_ident(def.columns[i]) + " TEXT";
        }
        create += ");";
        impl_->exec(create);

        const LoadedTable& t = dataset.table(def.name);
        std::string insert = "INSERT INTO " + quote_ident(def.name) + " VALUES (";
        for (size_t i = 0; i < def.columns.size(); ++i) {
            if (i) insert += ",";
            insert += "?";
        }
        insert += ");";
        sqlite3_stmt* stmt = nullptr;
        if (sqlite3_prepare_v2(impl_->db, insert.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
            fail_validation("sqlite: cannot prepare insert for " + def.name);
        for (const auto& row : t.rows) {
            for (size_t i = 0; i < row.size(); ++i) {
                const std::string& v = dataset.pool().str(row[i]);
                sqlite3_bind_text(stmt, static_cast<int>(i + 1), v.c_str(),
                                  static_cast<int>(v.size()), SQLITE_TRANSIENT);
            }
            if (sqlite3_step(stmt) != SQLITE_DONE) {
                sqlite3_finalize(stmt);
                fail_validation("sqlite: insert failed for " + def.name);
            }
            sqlite3_reset(stmt);
        }
        sqlite3_finalize(stmt);
    }
    impl_->exec("COMMIT;");
}

SqliteBackend::~SqliteBackend() {
    if (impl_ && impl_->db) sqlite3_close(impl_->db);
}

std::vector<GroupRow> SqliteBackend::execute_sql(const std::string& sql) {
    sqlite3_stmt* stmt = nullptr;
    if (sqlite3_prepare_v2(impl_->db, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
        fail_validation(std::string("sqlite: prepare failed: ") + sqlite3_errmsg(impl_->db) +
                        "\nSQL: " + sql);
    std::vector<GroupRow> rows;
    int rc;
    int ncols = sqlite3_column_count(stmt);
    while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
        GroupRow row;
        row.count = sqlite3_column_int64(stmt, 0);
        for (int c = 1; c < ncols; ++c) {
            const unsigned char* text = sqlite3_column_text(stmt, c);
            row.values.push_back(text ? reinterpret_cast<const char*>(text) : "");
        }
        rows.push_back(std::move(row));
    }
    sqlite3_finalize(stmt);
    if (rc != SQLITE_DONE)
        fail_validation(std::string("sqlite: step failed: ") + sqlite3_errmsg(impl_->db));
    return rows;
}

std::vector<GroupRow> SqliteBackend::execute(const MetaQuery& mq) {
    return execute_sql(render_sql(mq));
}

}  // namespace relbn
