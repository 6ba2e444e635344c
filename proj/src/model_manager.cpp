#include "relbn/model_manager.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "relbn/csv.hpp"
#include "relbn/error.hpp"
#include "relbn/strings.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace relbn {

double FactorTable::lookup(const std::string& child_value,
                           const std::vector<std::string>& parent_values) const {
    std::string parent_key = pack_values(parent_values);
    auto it = cp_index_.find(parent_key + "|" + child_value);
    if (it != cp_index_.end()) return it->second;
    if (alpha <= 0.0) return 0.0;
    auto tot = parent_totals_.find(parent_key);
    double k = static_cast<double>(child_domain.size());
    if (tot == parent_totals_.end()) return 1.0 / k;  // unseen configuration
    return alpha / (static_cast<double>(tot->second) + alpha * k);
}

int64_t FactorTable::parent_config_count(const std::vector<std::string>& parent_values) const {
    auto it = parent_totals_.find(pack_values(parent_values));
    return it == parent_totals_.end() ? 0 : it->second;
}

void FactorTable::rebuild_index() {
    cp_index_.clear();
    for (const auto& r : rows)
        cp_index_[pack_values(r.parent_values) + "|" + r.child_value] = r.cp;
}

FactorTable estimate_cpt(const Family& family, const ContingencyTable& ct,
                         const std::vector<std::string>& child_domain, double alpha) {
    std::vector<std::string> required = family.members();
    for (const auto& m : required)
        if (ct.column_index(m) < 0)
            fail_validation("estimate_cpt: contingency table is missing family column " + m);

    ContingencyTable proj = project_ct(ct, required);
    int child_idx = proj.column_index(family.child);
    std::vector<int> parent_idx;
    for (const auto& p : family.parents) parent_idx.push_back(proj.column_index(p));

    FactorTable ft;
    ft.family = family;
    ft.child_domain = child_domain;
    ft.alpha = alpha;

    std::map<std::vector<std::string>, int64_t> totals;
    std::map<std::pair<std::vector<std::string>, std::string>, int64_t> counts;
    for (const auto& r : proj.rows) {
        std::vector<std::string> parents;
        parents.reserve(parent_idx.size());
        for (int i : parent_idx) parents.push_back(r.values[i]);
        totals[parents] += r.count;
        counts[{parents, r.values[child_idx]}] += r.count;
    }
    double k = static_cast<double>(child_domain.size());
    for (const auto& [key, n] : counts) {
        const auto& [parents, child_value] = key;
        FactorTable::Row row;
        row.parent_values = parents;
        row.child_value = child_value;
        row.cp = (static_cast<double>(n) + alpha) /
                 (static_cast<double>(totals[parents]) + alpha * k);
        ft.rows.push_back(std::move(row));
    }
    std::sort(ft.rows.begin(), ft.rows.end(), [](const auto& a, const auto& b) {
        if (a.parent_values != b.parent_values) return a.parent_values < b.parent_values;
        return a.child_value < b.child_value;
    });
    for (const auto& [parents, n] : totals)
        ft.parent_totals_[pack_values(parents)] = n;
    ft.rebuild_index();
    return ft;
}

int64_t count_params(const Family& family, const VDB& vdb) {
    int64_t child_size = static_cast<int64_t>(vdb.domain(family.child).size());
    int64_t params = child_size - 1;
    for (const auto& p : family.parents) {
        int64_t size = static_cast<int64_t>(vdb.domain(p).size());
        if (params > 0 && size > 0 && params > INT64_MAX / size)
            fail_validation("count_params: parameter count overflows for child " + family.child);
        params *= size;
    }
    return params;
}

double family_loglik(const FactorTable& cpt, const ContingencyTable& ct) {
    std::vector<std::string> required = cpt.family.members();
    for (const auto& m : required)
        if (ct.column_index(m) < 0)
            fail_validation("family_loglik: contingency table is missing family column " + m);
    ContingencyTable proj = project_ct(ct, required);
    int child_idx = proj.column_index(cpt.family.child);
    std::vector<int> parent_idx;
    for (const auto& p : cpt.family.parents) parent_idx.push_back(proj.column_index(p));

    double ll = 0.0;
    for (const auto& r : proj.rows) {
        std::vector<std::string> parents;
        parents.reserve(parent_idx.size());
        for (int i : parent_idx) parents.push_back(r.values[i]);
        double cp = cpt.lookup(r.values[child_idx], parents);
        if (cp <= 0.0)
            fail_validation("family_loglik: cp = 0 with count > 0 for child " +
                            cpt.family.child + "; the CPT does not match the CT");
        ll += static_cast<double>(r.count) * std::log(cp);
    }
    return ll;
}

ModelScores score_model(const BayesNet& bn, const FamilyCtProvider& ct_provider, const VDB& vdb,
                        double alpha) {
    ModelScores scores;
    for (const auto& node : bn.nodes()) {
        Family fam = bn.family(node);
        ContingencyTable ct = ct_provider(fam);
        FactorTable ft = estimate_cpt(fam, ct, vdb.domain(node), alpha);
        ScoreRecord rec;
        rec.child = node;
        rec.loglikelihood = family_loglik(ft, ct);
        rec.num_params = count_params(fam, vdb);
        rec.aic = rec.loglikelihood - static_cast<double>(rec.num_params);
        scores.total_loglikelihood += rec.loglikelihood;
        scores.total_params += rec.num_params;
        scores.total_aic += rec.aic;
        scores.per_family.push_back(std::move(rec));
    }
    return scores;
}

namespace {

std::string cpt_file_name(const std::string& node) { return node + "_CPT.csv"; }

}  // namespace

void persist_mdb(const Mdb& mdb, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail_validation("cannot create MDB directory " + dir + ": " + ec.message());

    {
        csv::Table t;
        t.header = {"child", "parent"};
        for (const auto& [p, c] : mdb.bn.edges()) t.rows.push_back({c, p});
        std::sort(t.rows.begin(), t.rows.end());
        csv::write_file((fs::path(dir) / "BayesNet.csv").string(), t);
    }
    {
        csv::Table t;
        t.header = {"child", "loglikelihood", "#par", "aic"};
        for (const auto& r : mdb.scores.per_family)
            t.rows.push_back({r.child, fmt_double(r.loglikelihood), std::to_string(r.num_params),
                              fmt_double(r.aic)});
        csv::write_file((fs::path(dir) / "Scores.csv").string(), t);
    }
    json manifest;
    manifest["nodes"] = mdb.bn.nodes();
    json cpt_files = json::object();
    for (const auto& [node, ft] : mdb.cpts) {
        csv::Table t;
        t.header.push_back(node);
        for (const auto& p : ft.family.parents) t.header.push_back(p);
        t.header.push_back("cp");
        for (const auto& r : ft.rows) {
            std::vector<std::string> row;
            row.push_back(r.child_value);
            row.insert(row.end(), r.parent_values.begin(), r.parent_values.end());
            row.push_back(fmt_double(r.cp));
            t.rows.push_back(std::move(row));
        }
        std::string file = cpt_file_name(node);
        csv::write_file((fs::path(dir) / file).string(), t);
        cpt_files[node] = file;
    }
    manifest["cpt_files"] = cpt_files;
    manifest["alpha"] = mdb.cpts.empty() ? 0.0 : mdb.cpts.begin()->second.alpha;
    manifest["total_loglikelihood"] = fmt_double(mdb.scores.total_loglikelihood);
    manifest["total_params"] = mdb.scores.total_params;
    manifest["total_aic"] = fmt_double(mdb.scores.total_aic);

    std::ofstream out(fs::path(dir) / "model.json", std::ios::trunc);
    if (!out) fail_validation("cannot write " + dir + "/model.json");
    out << manifest.dump(2) << "\n";
}

Mdb load_mdb(const std::string& dir) {
    fs::path manifest_path = fs::path(dir) / "model.json";
    std::ifstream in(manifest_path);
    if (!in)
        fail(ErrorKind::MissingDependency,
             "MDB manifest missing: " + manifest_path.string() + "; run the learn stage first");
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        fail_validation("malformed model.json: " + std::string(e.what()));
    }

    Mdb mdb;
    std::vector<std::string> nodes = manifest.at("nodes").get<std::vector<std::string>>();
    mdb.bn = BayesNet(nodes);
    double alpha = manifest.value("alpha", 0.0);

    csv::Table edges = csv::read_file((fs::path(dir) / "BayesNet.csv").string());
    if (edges.header != std::vector<std::string>{"child", "parent"})
        fail_validation("BayesNet.csv has unexpected columns");
    for (const auto& row : edges.rows) mdb.bn.add_edge(row[1], row[0]);

    for (const auto& node : nodes) {
        std::string file = manifest.at("cpt_files").at(node).get<std::string>();
        csv::Table t = csv::read_file((fs::path(dir) / file).string());
        if (t.header.size() < 2 || t.header.front() != node || t.header.back() != "cp")
            fail_validation("CPT file " + file + " has unexpected columns");
        FactorTable ft;
        ft.family.child = node;
        ft.family.parents.assign(t.header.begin() + 1, t.header.end() - 1);
        ft.alpha = alpha;
        for (const auto& row : t.rows) {
            FactorTable::Row r;
            r.child_value = row.front();
            r.parent_values.assign(row.begin() + 1, row.end() - 1);
            r.cp = std::strtod(row.back().c_str(), nullptr);
            ft.rows.push_back(std::move(r));
        }
        // Parent totals are not serialized; smoothed lookups of unseen rows
        // need re-estimation from counts, which prediction does anyway.
        ft.rebuild_index();
        mdb.cpts[node] = std::move(ft);
        if (mdb.bn.family(node).parents != mdb.cpts[node].family.parents)
            fail_validation("CPT parents for " + node + " do not match BayesNet.csv");
    }

    csv::Table sc = csv::read_file((fs::path(dir) / "Scores.csv").string());
    if (sc.header != std::vector<std::string>{"child", "loglikelihood", "#par", "aic"})
        fail_validation("Scores.csv has unexpected columns");
    for (const auto& row : sc.rows) {
        ScoreRecord r;
        r.child = row[0];
        r.loglikelihood = std::strtod(row[1].c_str(), nullptr);
        r.num_params = std::stoll(row[2]);
        r.aic = std::strtod(row[3].c_str(), nullptr);
        mdb.scores.total_loglikelihood += r.loglikelihood;
        mdb.scores.total_params += r.num_params;
        mdb.scores.total_aic += r.aic;
        mdb.scores.per_family.push_back(std::move(r));
    }
    return mdb;
}

}  // namespace relbn
