#include "relbn/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "relbn/csv.hpp"
#include "relbn/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace relbn {

const char* ValuePool::kNA = "n/a";

ValuePool::ValuePool() { intern(kNA); }

uint32_t ValuePool::intern(const std::string& s) {
    auto it = map_.find(s);
    if (it != map_.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(strings_.size());
    strings_.push_back(s);
    map_.emplace(s, id);
    return id;
}

uint32_t ValuePool::find(const std::string& s) const {
    auto it = map_.find(s);
    return it == map_.end() ? kInvalid : it->second;
}

const std::string& ValuePool::str(uint32_t id) const { return strings_.at(id); }

bool TableDef::has_column(const std::string& col) const {
    return std::find(columns.begin(), columns.end(), col) != columns.end();
}

bool TableDef::is_key_column(const std::string& col) const {
    if (std::find(primary_key.begin(), primary_key.end(), col) != primary_key.end())
        return true;
    for (const auto& fk : foreign_keys)
        if (fk.column == col) return true;
    return false;
}

int LoadedTable::column_index(const std::string& col) const {
    auto it = col_index_.find(col);
    return it == col_index_.end() ? -1 : it->second;
}

std::string LoadedTable::pack_key(const std::vector<uint32_t>& vals) {
    std::string key;
    key.reserve(vals.size() * 4);
    for (uint32_t v : vals)
        key.append(reinterpret_cast<const char*>(&v), sizeof(v));
    return key;
}

namespace {

std::string require_string(const json& j, const char* field, const std::string& ctx) {
    if (!j.contains(field) || !j[field].is_string())
        fail_validation(ctx + ": missing or non-string field \"" + field + "\"");
    return j[field].get<std::string>();
}

std::vector<std::string> require_string_array(const json& j, const char* field,
                                              const std::string& ctx, bool allow_missing) {
    if (!j.contains(field)) {
        if (allow_missing) return {};
        fail_validation(ctx + ": missing field \"" + field + "\"");
    }
    if (!j[field].is_array())
        fail_validation(ctx + ": field \"" + field + "\" must be an array");
    std::vector<std::string> out;
    for (const auto& e : j[field]) {
        if (!e.is_string())
            fail_validation(ctx + ": field \"" + field + "\" must contain strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

}  // namespace

DatasetManifest DatasetManifest::parse(const std::string& json_text, const std::string& origin,
                                       const std::string& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        fail_validation("malformed dataset manifest " + origin + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("tables") || !doc["tables"].is_array())
        fail_validation("malformed dataset manifest " + origin +
                        ": expected an object with a \"tables\" array");

    DatasetManifest m;
    m.path = origin;
    std::set<std::string> table_names;
    for (const auto& jt : doc["tables"]) {
        TableDef t;
        const std::string ctx = origin + ", table " +
                                (jt.contains("name") && jt["name"].is_string()
                                     ? jt["name"].get<std::string>()
                                     : std::string("<unnamed>"));
        t.name = require_string(jt, "name", ctx);
        if (!table_names.insert(t.name).second)
            fail_validation(origin + ": duplicate table name " + t.name);
        std::string csv_rel = require_string(jt, "csv", ctx);
        fs::path p(csv_rel);
        t.csv_path = p.is_absolute() ? p.string() : (fs::path(base_dir) / p).string();
        t.columns = require_string_array(jt, "columns", ctx, false);
        if (t.columns.empty()) fail_validation(ctx + ": empty column list");
        std::set<std::string> cols(t.columns.begin(), t.columns.end());
        if (cols.size() != t.columns.size())
            fail_validation(ctx + ": duplicate column names");
        t.primary_key = require_string_array(jt, "primary_key", ctx, true);
        std::set<std::string> pk_set;
        for (const auto& c : t.primary_key) {
            if (!cols.count(c))
                fail_validation(ctx + ": primary key column " + c + " is not a column");
            if (!pk_set.insert(c).second)
                fail_validation(ctx + ": duplicate primary key column " + c);
        }
        if (jt.contains("foreign_keys")) {
            if (!jt["foreign_keys"].is_array())
                fail_validation(ctx + ": \"foreign_keys\" must be an array");
            int ordinal = 0;
            std::set<std::string> fk_cols;
            for (const auto& jf : jt["foreign_keys"]) {
                ForeignKey fk;
                fk.column = require_string(jf, "column", ctx);
                fk.referenced_table = require_string(jf, "references_table", ctx);
                fk.referenced_column = require_string(jf, "references_column", ctx);
                fk.ordinal_position = ++ordinal;
                if (!cols.count(fk.column))
                    fail_validation(ctx + ": foreign key column " + fk.column +
                                    " is not a column");
                if (!fk_cols.insert(fk.column).second)
                    fail_validation(ctx + ": column " + fk.column +
                                    " declared in more than one foreign key");
                t.foreign_keys.push_back(fk);
            }
        }
        m.tables.push_back(std::move(t));
    }
    if (m.tables.empty()) fail_validation(origin + ": manifest declares no tables");

    // Cross-table reference checks.
    for (const auto& t : m.tables) {
        for (const auto& fk : t.foreign_keys) {
            const TableDef* ref = m.find_table(fk.referenced_table);
            if (!ref)
                fail_validation(origin + ": foreign key " + t.name + "." + fk.column +
                                " references missing table " + fk.referenced_table);
            if (!ref->has_column(fk.referenced_column))
                fail_validation(origin + ": foreign key " + t.name + "." + fk.column +
                                " references missing column " + fk.referenced_table + "." +
                                fk.referenced_column);
        }
    }
    return m;
}

DatasetManifest DatasetManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_validation("cannot open dataset manifest: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path, fs::path(path).parent_path().string());
}

const TableDef* DatasetManifest::find_table(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name) return &t;
    return nullptr;
}

const LoadedTable& Dataset::table(const std::string& name) const {
    auto it = tables_.find(name);
    if (it == tables_.end()) fail_validation("unknown table: " + name);
    return it->second;
}

const LoadedTable* Dataset::find_table(const std::string& name) const {
    auto it = tables_.find(name);
    return it == tables_.end() ? nullptr : &it->second;
}

size_t Dataset::pk_row(const std::string& table_name, uint32_t value) const {
    const LoadedTable& t = table(table_name);
    auto it = t.pk_index.find(LoadedTable::pack_key({value}));
    return it == t.pk_index.end() ? SIZE_MAX : it->second;
}

Dataset Dataset::load_file(const std::string& manifest_path) {
    return load(DatasetManifest::load(manifest_path));
}

Dataset Dataset::load(DatasetManifest manifest) {
    Dataset ds;
    ds.manifest_ = std::move(manifest);

    for (const auto& def : ds.manifest_.tables) {
        csv::Table raw = csv::read_file(def.csv_path);
        if (raw.header != def.columns) {
            std::string want, got;
            for (const auto& c : def.columns) want += (want.empty() ? "" : ",") + c;
            for (const auto& c : raw.header) got += (got.empty() ? "" : ",") + c;
            fail_validation("table " + def.name + ": CSV header [" + got +
                            "] does not match manifest columns [" + want + "]");
        }
        LoadedTable lt;
        lt.def = &def;
        for (size_t i = 0; i < def.columns.size(); ++i)
            lt.col_index_[def.columns[i]] = static_cast<int>(i);

        lt.rows.reserve(raw.rows.size());
        for (size_t r = 0; r < raw.rows.size(); ++r) {
            std::vector<uint32_t> row(raw.rows[r].size());
            for (size_t c = 0; c < raw.rows[r].size(); ++c) {
                const std::string& v = raw.rows[r][c];
                if (v.empty())
                    fail_validation("table " + def.name + ", row " + std::to_string(r + 1) +
                                    ", column " + def.columns[c] +
                                    ": empty string is an illegal value");
                if (v == ValuePool::kNA)
                    fail_validation("table " + def.name + ", row " + std::to_string(r + 1) +
                                    ", column " + def.columns[c] +
                                    ": value collides with the reserved token \"n/a\"; "
                                    "rename the value in the source data");
                row[c] = ds.pool_.intern(v);
            }
            lt.rows.push_back(std::move(row));
        }

        // Primary key uniqueness.
        if (!def.primary_key.empty()) {
            std::vector<int> pk_cols;
            for (const auto& c : def.primary_key) pk_cols.push_back(lt.column_index(c));
            for (size_t r = 0; r < lt.rows.size(); ++r) {
                std::vector<uint32_t> key;
                for (int ci : pk_cols) key.push_back(lt.rows[r][ci]);
                auto [it, inserted] = lt.pk_index.emplace(LoadedTable::pack_key(key), r);
                if (!inserted)
                    fail_validation("table " + def.name + ": duplicate primary key in row " +
                                    std::to_string(r + 1));
            }
        }
        ds.tables_.emplace(def.name, std::move(lt));
    }

    // FK integrity: every FK value must exist in the referenced column.
    for (const auto& def : ds.manifest_.tables) {
        const LoadedTable& lt = ds.tables_.at(def.name);
        for (const auto& fk : def.foreign_keys) {
            const LoadedTable& ref = ds.tables_.at(fk.referenced_table);
            int ref_ci = ref.column_index(fk.referenced_column);
            std::set<uint32_t> ref_vals;
            for (const auto& row : ref.rows) ref_vals.insert(row[ref_ci]);
            int ci = lt.column_index(fk.column);
            for (size_t r = 0; r < lt.rows.size(); ++r) {
                if (!ref_vals.count(lt.rows[r][ci]))
                    fail_validation("table " + def.name + ", row " + std::to_string(r + 1) +
                                    ": foreign key " + fk.column + " value \"" +
                                    ds.pool_.str(lt.rows[r][ci]) + "\" not found in " +
                                    fk.referenced_table + "." + fk.referenced_column);
            }
        }
    }
    return ds;
}

}  // namespace relbn
