#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "relbn/error.hpp"
#include "relbn/schema_analyzer.hpp"
#include "relbn/vdb.hpp"
#include "support/helpers.hpp"

using namespace relbn;
using namespace relbn::test;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string export_fingerprint(const VDB& vdb, const TempDir& dir, const std::string& sub) {
    std::string out = (dir.path() / sub).string();
    export_vdb(vdb, out);
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(out)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string all;
    for (const auto& f : files) all += f.filename().string() + "\n" + slurp(f);
    return all;
}

}  // namespace

TEST_CASE("university metadata: 3 tables, RA has the two expected FKs") {
    Dataset ds = load_toy();
    SchemaMetadata md = extract_metadata(ds.manifest());
    CHECK(md.tables.size() == 3);
    const auto& fks = md.foreign_keys.at("RA");
    REQUIRE(fks.size() == 2);
    CHECK(fks[0].column == "p_id");
    CHECK(fks[0].referenced_table == "Professor");
    CHECK(fks[0].referenced_column == "p_id");
    CHECK(fks[1].column == "s_id");
    CHECK(fks[1].referenced_table == "Student");
    CHECK(fks[1].referenced_column == "s_id");
    CHECK(fks[0].ordinal_position == 1);
    CHECK(fks[1].ordinal_position == 2);
    CHECK(md.num_entity_columns("RA") == 2);
    // Catalog analogs are queryable.
    CHECK(md.key_info().size() == 2 + 1 + 1 + 2);  // RA pk(2) + entity pks + RA fks
    CHECK(md.position_info().size() == 3 + 3 + 4);
}

TEST_CASE("single table with no FKs yields empty foreign key metadata") {
    TempDir dir("md_single");
    auto manifest = write_inline_dataset(dir, {{"T", "id,x\n1,a\n", {"id", "x"}, {"id"}, {}}});
    Dataset ds = Dataset::load_file(manifest);
    SchemaMetadata md = extract_metadata(ds.manifest());
    CHECK(md.foreign_keys.at("T").empty());
    CHECK(md.num_entity_columns("T") == 1);
}

TEST_CASE("composite 3-column FK-derived key counts 3 entity columns and is excluded") {
    TempDir dir("md_tern");
    auto manifest = write_inline_dataset(
        dir, {{"A", "a_id\na1\n", {"a_id"}, {"a_id"}, {}},
              {"B", "b_id\nb1\n", {"b_id"}, {"b_id"}, {}},
              {"C", "c_id\nc1\n", {"c_id"}, {"c_id"}, {}},
              {"T",
               "a,b,c,v\na1,b1,c1,x\n",
               {"a", "b", "c", "v"},
               {"a", "b", "c"},
               {{{"a", "A", "a_id"}, {"b", "B", "b_id"}, {"c", "C", "c_id"}}}}});
    Dataset ds = Dataset::load_file(manifest);
    SchemaMetadata md = extract_metadata(ds.manifest());
    CHECK(md.num_entity_columns("T") == 3);

    Classification cls = classify_tables(md);
    REQUIRE(cls.excluded.size() == 1);
    CHECK(cls.excluded[0].table == "T");
    CHECK(cls.excluded[0].reason == "ternary");

    // No par-RV may reference an excluded table.
    VDB vdb = analyze(ds);
    for (const auto& id : vdb.all_par_rv_ids()) CHECK(vdb.par_rv(id).table != "T");
}

TEST_CASE("university toy classification") {
    Dataset ds = load_toy();
    Classification cls = classify_tables(extract_metadata(ds.manifest()));
    CHECK(cls.entity_tables == std::vector<std::string>{"Professor", "Student"});
    REQUIRE(cls.relationship_tables.count("RA"));
    CHECK_FALSE(cls.relationship_tables.at("RA").self_relationship);
    CHECK_FALSE(cls.relationship_tables.at("RA").many_one);
    CHECK(cls.excluded.empty());
}

TEST_CASE("self-relationship classification and index-1 FOVar") {
    TempDir dir("self");
    auto manifest = write_inline_dataset(
        dir, {{"User", "u_id,Age\nu1,young\nu2,old\n", {"u_id", "Age"}, {"u_id"}, {}},
              {"Friend",
               "u1,u2\nu1,u2\n",
               {"u1", "u2"},
               {"u1", "u2"},
               {{{"u1", "User", "u_id"}, {"u2", "User", "u_id"}}}}});
    Dataset ds = Dataset::load_file(manifest);
    Classification cls = classify_tables(extract_metadata(ds.manifest()));
    REQUIRE(cls.relationship_tables.count("Friend"));
    CHECK(cls.relationship_tables.at("Friend").self_relationship);

    VDB vdb = analyze(ds);
    // User gains the index-1 duplicate.
    REQUIRE(vdb.pvariables.size() == 2);
    CHECK(vdb.pvariables[0].id == "User0");
    CHECK(vdb.pvariables[1].id == "User1");
    // Exactly one indicator Friend(User0,User1); no (U1,U0) or (U0,U0).
    REQUIRE(vdb.relationships.size() == 1);
    CHECK(vdb.relationships[0].id == "Friend(User0,User1)");
    CHECK_FALSE(vdb.relationships[0].main);
    // Entity attributes exist per FOVar.
    std::vector<std::string> ids = vdb.all_par_rv_ids();
    CHECK(std::count(ids.begin(), ids.end(), "Age(User0)") == 1);
    CHECK(std::count(ids.begin(), ids.end(), "Age(User1)") == 1);
}

TEST_CASE("keyless log table is excluded with reason no-primary-key") {
    TempDir dir("nopk");
    auto manifest = write_inline_dataset(
        dir, {{"E", "e_id,x\ne1,a\n", {"e_id", "x"}, {"e_id"}, {}},
              {"Log", "msg,lvl\nboot,info\n", {"msg", "lvl"}, {}, {}}});
    Dataset ds = Dataset::load_file(manifest);
    Classification cls = classify_tables(extract_metadata(ds.manifest()));
    REQUIRE(cls.excluded.size() == 1);
    CHECK(cls.excluded[0].table == "Log");
    CHECK(cls.excluded[0].reason == "no-primary-key");
}

TEST_CASE("composite entity primary key is excluded with a warning reason") {
    TempDir dir("composite");
    auto manifest = write_inline_dataset(
        dir, {{"Flight", "airline,no,dest\nAC,101,YVR\n",
               {"airline", "no", "dest"}, {"airline", "no"}, {}}});
    Dataset ds = Dataset::load_file(manifest);
    Classification cls = classify_tables(extract_metadata(ds.manifest()));
    REQUIRE(cls.excluded.size() == 1);
    CHECK(cls.excluded[0].reason == "composite-key");
}

TEST_CASE("university toy par-RVs match the expected node set") {
    Dataset ds = load_toy();
    VDB vdb = analyze(ds);
    std::vector<std::string> expected = {
        "Capability(Professor0,Student0)", "Intelligence(Student0)",
        "Popularity(Professor0)",          "RA(Professor0,Student0)",
        "Ranking(Student0)",               "Salary(Professor0,Student0)",
        "Teachingability(Professor0)"};
    CHECK(vdb.all_par_rv_ids() == expected);
    const ParRV& ra = vdb.par_rv("RA(Professor0,Student0)");
    CHECK(ra.kind == ParRVKind::RelationshipIndicator);
    CHECK(ra.key_columns == std::vector<std::string>{"p_id", "s_id"});
    CHECK(ra.main);
    const ParRV& cap = vdb.par_rv("Capability(Professor0,Student0)");
    CHECK(cap.kind == ParRVKind::RelationshipAttribute);
    CHECK(cap.indicator_id == "RA(Professor0,Student0)");
}

TEST_CASE("entity table with zero non-key columns yields zero entity attributes") {
    TempDir dir("barepop");
    auto manifest = write_inline_dataset(
        dir, {{"E", "e_id\ne1\ne2\n", {"e_id"}, {"e_id"}, {}},
              {"F", "f_id,v\nf1,a\n", {"f_id", "v"}, {"f_id"}, {}}});
    Dataset ds = Dataset::load_file(manifest);
    VDB vdb = analyze(ds);
    for (const auto& v : vdb.one_variables) CHECK(v.table != "E");
    CHECK(vdb.find_fovar("E0") != nullptr);
}

TEST_CASE("many-one relationship with both slots FK-covered generates an indicator") {
    // Supervises(s_id PK -> Student, p_id -> Professor): single-column PK plus
    // an FK outside it -> many-one, both slots resolvable.
    TempDir dir("manyone");
    auto manifest = write_inline_dataset(
        dir, {{"Student", "s_id,Smart\nst1,yes\nst2,no\n", {"s_id", "Smart"}, {"s_id"}, {}},
              {"Professor", "p_id,Rank\npr1,full\n", {"p_id", "Rank"}, {"p_id"}, {}},
              {"Supervises",
               "s_id,p_id,Funding\nst1,pr1,grant\n",
               {"s_id", "p_id", "Funding"},
               {"s_id"},
               {{{"s_id", "Student", "s_id"}, {"p_id", "Professor", "p_id"}}}}});
    Dataset ds = Dataset::load_file(manifest);
    Classification cls = classify_tables(extract_metadata(ds.manifest()));
    REQUIRE(cls.relationship_tables.count("Supervises"));
    CHECK(cls.relationship_tables.at("Supervises").many_one);
    CHECK_FALSE(cls.relationship_tables.at("Supervises").self_relationship);

    VDB vdb = analyze(ds);
    REQUIRE(vdb.relationships.size() == 1);
    CHECK(vdb.relationships[0].id == "Supervises(Student0,Professor0)");
    CHECK(vdb.relationships[0].many_one);
    std::vector<std::string> ids = vdb.all_par_rv_ids();
    CHECK(std::count(ids.begin(), ids.end(), "Funding(Student0,Professor0)") == 1);
}

TEST_CASE("many-one table whose PK is not an FK generates nothing, with a warning") {
    TempDir dir("manyone_b");
    auto manifest = write_inline_dataset(
        dir, {{"Professor", "p_id,Rank\npr1,full\n", {"p_id", "Rank"}, {"p_id"}, {}},
              {"Student",
               "s_id,advisor,Smart\nst1,pr1,yes\n",
               {"s_id", "advisor", "Smart"},
               {"s_id"},
               {{{"advisor", "Professor", "p_id"}}}}});
    Dataset ds = Dataset::load_file(manifest);
    Classification cls = classify_tables(extract_metadata(ds.manifest()));
    REQUIRE(cls.relationship_tables.count("Student"));
    CHECK(cls.relationship_tables.at("Student").many_one);

    VDB vdb = analyze(ds);
    for (const auto& id : vdb.all_par_rv_ids()) CHECK(vdb.par_rv(id).table != "Student");
    bool warned = false;
    for (const auto& w : vdb.warnings)
        if (w.find("Student") != std::string::npos) warned = true;
    CHECK(warned);
}

TEST_CASE("foreign key into a non-entity table generates nothing, with a warning") {
    TempDir dir("chain");
    auto manifest = write_inline_dataset(
        dir, {{"A", "a_id\na1\n", {"a_id"}, {"a_id"}, {}},
              {"B", "b_id\nb1\n", {"b_id"}, {"b_id"}, {}},
              {"R1", "a,b\na1,b1\n", {"a", "b"}, {"a", "b"},
               {{{"a", "A", "a_id"}, {"b", "B", "b_id"}}}},
              {"R2", "r,b\na1,b1\n", {"r", "b"}, {"r", "b"},
               {{{"r", "R1", "a"}, {"b", "B", "b_id"}}}}});
    Dataset ds = Dataset::load_file(manifest);
    VDB vdb = analyze(ds);
    for (const auto& id : vdb.all_par_rv_ids()) CHECK(vdb.par_rv(id).table != "R2");
    bool warned = false;
    for (const auto& w : vdb.warnings)
        if (w.find("R2") != std::string::npos && w.find("non-entity") != std::string::npos)
            warned = true;
    CHECK(warned);
}

TEST_CASE("toy domains follow the observed values, n/a placement, indicator domain") {
    Dataset ds = load_toy();
    VDB vdb = analyze(ds);
    CHECK(vdb.domain("Salary(Professor0,Student0)") ==
          std::vector<std::string>{"high", "low", "med", "n/a"});
    CHECK(vdb.domain("RA(Professor0,Student0)") == std::vector<std::string>{"F", "T"});
    CHECK(vdb.domain("Intelligence(Student0)") == std::vector<std::string>{"1", "2", "3"});
    // n/a belongs to relationship attributes and only to them.
    for (const auto& id : vdb.all_par_rv_ids()) {
        const auto& dom = vdb.domain(id);
        bool has_na = std::find(dom.begin(), dom.end(), "n/a") != dom.end();
        CHECK(has_na == (vdb.par_rv(id).kind == ParRVKind::RelationshipAttribute));
    }
}

TEST_CASE("empty relationship table: attribute domain is {n/a}; empty entity rejects") {
    TempDir dir("empty");
    SUBCASE("relationship") {
        auto manifest = write_inline_dataset(
            dir, {{"A", "a_id\na1\n", {"a_id"}, {"a_id"}, {}},
                  {"B", "b_id\nb1\n", {"b_id"}, {"b_id"}, {}},
                  {"R",
                   "a,b,w\n",
                   {"a", "b", "w"},
                   {"a", "b"},
                   {{{"a", "A", "a_id"}, {"b", "B", "b_id"}}}}});
        Dataset ds = Dataset::load_file(manifest);
        VDB vdb = analyze(ds);
        CHECK(vdb.domain("w(A0,B0)") == std::vector<std::string>{"n/a"});
    }
    SUBCASE("entity") {
        auto manifest =
            write_inline_dataset(dir, {{"A", "a_id,x\n", {"a_id", "x"}, {"a_id"}, {}}});
        Dataset ds = Dataset::load_file(manifest);
        CHECK_THROWS_WITH_AS(analyze(ds), doctest::Contains("nonempty"), Error);
    }
}

TEST_CASE("coverage: every non-key column of every generating table is linked exactly once per FOVar tuple") {
    Dataset ds = load_toy();
    VDB vdb = analyze(ds);
    std::map<std::pair<std::string, std::string>, int> links;  // (table.column, fovar tuple)
    std::map<std::string, int> per_column;
    for (const auto* list : {&vdb.one_variables, &vdb.two_variables})
        for (const auto& v : *list) {
            std::string tuple;
            for (const auto& f : v.fo_vars) tuple += f + ",";
            ++links[{v.table + "." + v.column, tuple}];
            ++per_column[v.table + "." + v.column];
        }
    for (const auto& [k, n] : links) CHECK(n == 1);
    CHECK(per_column.size() == 6);  // 2+2 entity columns, 2 relationship columns
}

TEST_CASE("duplicate functor names across tables are rejected") {
    TempDir dir("functor");
    auto manifest = write_inline_dataset(
        dir, {{"A", "a_id,Rank\na1,x\n", {"a_id", "Rank"}, {"a_id"}, {}},
              {"B", "b_id,Rank\nb1,y\n", {"b_id", "Rank"}, {"b_id"}, {}}});
    Dataset ds = Dataset::load_file(manifest);
    CHECK_THROWS_WITH_AS(analyze(ds), doctest::Contains("rename"), Error);
}

TEST_CASE("determinism: analyzing the same manifest twice exports byte-identical VDBs") {
    TempDir dir("det");
    Dataset ds1 = load_toy();
    Dataset ds2 = load_toy();
    std::string a = export_fingerprint(analyze(ds1), dir, "v1");
    std::string b = export_fingerprint(analyze(ds2), dir, "v2");
    CHECK(a == b);
}

TEST_CASE("VDB export/import round trip preserves everything") {
    TempDir dir("roundtrip");
    Dataset ds = load_toy();
    VDB vdb = analyze(ds);
    std::string out = (dir.path() / "vdb").string();
    export_vdb(vdb, out);
    VDB loaded = import_vdb(out, ds.manifest());
    CHECK(loaded.all_par_rv_ids() == vdb.all_par_rv_ids());
    for (const auto& id : vdb.all_par_rv_ids()) {
        CHECK(loaded.domain(id) == vdb.domain(id));
        CHECK(loaded.par_rv(id).kind == vdb.par_rv(id).kind);
        CHECK(loaded.par_rv(id).fo_vars == vdb.par_rv(id).fo_vars);
        CHECK(loaded.par_rv(id).main == vdb.par_rv(id).main);
    }
    // Re-export of the imported VDB is byte-identical to the original export.
    std::string again = (dir.path() / "vdb2").string();
    export_vdb(loaded, again);
    for (const auto& e : std::filesystem::directory_iterator(out)) {
        auto other = std::filesystem::path(again) / e.path().filename();
        CHECK(slurp(e.path()) == slurp(other));
    }
}
