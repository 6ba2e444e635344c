#include "relbn/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "relbn/csv.hpp"
#include "relbn/error.hpp"
#include "relbn/predictor.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace relbn {

namespace {

// Platform-stable helpers over the mt19937_64 stream (the std distributions
// are implementation-defined).
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(uint64_t seed) : gen(seed) {}
    uint64_t uniform_int(uint64_t n) { return gen() % n; }
    double uniform01() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform01() < p; }
};

SynthRecipe parse_recipe(const json& j, const std::string& ctx) {
    SynthRecipe r;
    if (!j.contains("recipe")) return r;
    const json& jr = j["recipe"];
    std::string kind = jr.value("kind", "uniform");
    if (kind == "uniform") {
        r.kind = SynthRecipe::Kind::Uniform;
    } else if (kind == "noisy-copy") {
        r.kind = SynthRecipe::Kind::NoisyCopy;
        if (!jr.contains("source") || !jr["source"].is_string())
            fail_validation(ctx + ": noisy-copy recipe needs a \"source\"");
        r.source = jr["source"].get<std::string>();
        r.noise = jr.value("noise", 0.1);
        if (r.noise < 0.0 || r.noise > 1.0)
            fail_validation(ctx + ": noise must be in [0,1]");
    } else {
        fail_validation(ctx + ": unknown recipe kind " + kind);
    }
    return r;
}

std::vector<SynthAttribute> parse_attributes(const json& j, const std::string& ctx) {
    std::vector<SynthAttribute> out;
    if (!j.contains("attributes")) return out;
    for (const auto& ja : j["attributes"]) {
        SynthAttribute a;
        a.name = ja.value("name", "");
        if (a.name.empty()) fail_validation(ctx + ": attribute without a name");
        a.domain_size = ja.value("domain_size", 2);
        if (a.domain_size < 1) fail_validation(ctx + ": domain_size must be >= 1");
        a.recipe = parse_recipe(ja, ctx + "." + a.name);
        out.push_back(std::move(a));
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

SynthSpec SynthSpec::parse(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        fail_validation("malformed synthetic spec " + origin + ": " + e.what());
    }
    SynthSpec spec;
    spec.seed = doc.value("seed", 0ULL);
    if (!doc.contains("entities") || !doc["entities"].is_array())
        fail_validation(origin + ": spec needs an \"entities\" array");
    for (const auto& je : doc["entities"]) {
        SynthEntity e;
        e.name = je.value("name", "");
        if (e.name.empty()) fail_validation(origin + ": entity without a name");
        e.size = je.value("size", 1);
        e.attributes = parse_attributes(je, origin + ":" + e.name);
        spec.entities.push_back(std::move(e));
    }
    if (doc.contains("relationships")) {
        for (const auto& jr : doc["relationships"]) {
            SynthRelationship r;
            r.name = jr.value("name", "");
            if (r.name.empty()) fail_validation(origin + ": relationship without a name");
            r.from = jr.value("from", "");
            r.to = jr.value("to", "");
            r.density = jr.value("density", 0.5);
            r.attributes = parse_attributes(jr, origin + ":" + r.name);
            spec.relationships.push_back(std::move(r));
        }
    }
    if (doc.contains("test_split")) {
        SynthTestSplit ts;
        ts.entity = doc["test_split"].value("entity", "");
        ts.attribute = doc["test_split"].value("attribute", "");
        ts.count = doc["test_split"].value("count", 0);
        spec.test_split = ts;
    }
    spec.validate();
    return spec;
}

SynthSpec SynthSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_validation("cannot open synthetic spec: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

void SynthSpec::validate() const {
    if (entities.empty()) fail_validation("synthetic spec: at least one entity is required");
    std::set<std::string> names;
    for (const auto& e : entities) {
        if (!names.insert(e.name).second)
            fail_validation("synthetic spec: duplicate table name " + e.name);
        if (e.size < 1) fail_validation("synthetic spec: population sizes must be >= 1");
        std::set<std::string> attrs;
        for (const auto& a : e.attributes) {
            if (!attrs.insert(a.name).second)
                fail_validation("synthetic spec: duplicate attribute " + e.name + "." + a.name);
            if (a.recipe.kind == SynthRecipe::Kind::NoisyCopy && !attrs.count(a.recipe.source))
                fail_validation("synthetic spec: " + e.name + "." + a.name +
                                " copies from " + a.recipe.source +
                                " which is not an earlier attribute of " + e.name);
        }
    }
    auto find_entity = [&](const std::string& n) {
        for (const auto& e : entities)
            if (e.name == n) return true;
        return false;
    };
    for (const auto& r : relationships) {
        if (!names.insert(r.name).second)
            fail_validation("synthetic spec: duplicate table name " + r.name);
        if (!find_entity(r.from) || !find_entity(r.to))
            fail_validation("synthetic spec: relationship " + r.name +
                            " references an unknown entity");
        if (r.density < 0.0 || r.density > 1.0)
            fail_validation("synthetic spec: density must be in [0,1]");
        std::set<std::string> attrs;
        for (const auto& a : r.attributes) {
            if (!attrs.insert(a.name).second)
                fail_validation("synthetic spec: duplicate attribute " + r.name + "." + a.name);
            if (a.recipe.kind == SynthRecipe::Kind::NoisyCopy) {
                const std::string& src = a.recipe.source;
                auto endpoint_has = [&](const std::string& entity, const std::string& attr) {
                    for (const auto& e : entities)
                        if (e.name == entity)
                            for (const auto& ea : e.attributes)
                                if (ea.name == attr) return true;
                    return false;
                };
                bool ok = false;
                if (src.rfind("from:", 0) == 0) ok = endpoint_has(r.from, src.substr(5));
                else if (src.rfind("to:", 0) == 0) ok = endpoint_has(r.to, src.substr(3));
                else ok = attrs.count(src) > 0;
                if (!ok)
                    fail_validation("synthetic spec: " + r.name + "." + a.name +
                                    " copies from unknown source " + src);
            }
        }
    }
    if (test_split) {
        bool found = false;
        for (const auto& e : entities)
            if (e.name == test_split->entity)
                for (const auto& a : e.attributes)
                    if (a.name == test_split->attribute) found = true;
        if (!found)
            fail_validation("synthetic spec: test_split references unknown attribute " +
                            test_split->entity + "." + test_split->attribute);
        if (test_split->count < 1)
            fail_validation("synthetic spec: test_split count must be >= 1");
    }
}

std::string generate_dataset(const SynthSpec& spec, const std::string& out_dir) {
    fs::create_directories(out_dir);
    Rng rng(spec.seed);

    auto value_name = [](int idx) { return "v" + std::to_string(idx); };
    auto sample_attr = [&](const SynthAttribute& a, int source_idx) {
        if (a.recipe.kind == SynthRecipe::Kind::NoisyCopy && source_idx >= 0 &&
            !rng.bernoulli(a.recipe.noise))
            return source_idx % a.domain_size;
        return static_cast<int>(rng.uniform_int(static_cast<uint64_t>(a.domain_size)));
    };

    // Entity tables. Attribute values are kept as indexes for recipe sources.
    std::map<std::string, std::vector<std::map<std::string, int>>> entity_values;
    std::map<std::string, const SynthEntity*> entity_by_name;
    json manifest;
    manifest["tables"] = json::array();

    for (const auto& e : spec.entities) {
        entity_by_name[e.name] = &e;
        std::string pk = lower(e.name) + "_id";
        csv::Table t;
        t.header.push_back(pk);
        for (const auto& a : e.attributes) t.header.push_back(a.name);
        auto& values = entity_values[e.name];
        values.resize(e.size);
        for (int i = 0; i < e.size; ++i) {
            std::vector<std::string> row;
            row.push_back(e.name + std::to_string(i + 1));
            for (const auto& a : e.attributes) {
                int src = -1;
                if (a.recipe.kind == SynthRecipe::Kind::NoisyCopy)
                    src = values[i].at(a.recipe.source);
                int v = sample_attr(a, src);
                values[i][a.name] = v;
                row.push_back(value_name(v));
            }
            t.rows.push_back(std::move(row));
        }
        csv::write_file((fs::path(out_dir) / (e.name + ".csv")).string(), t);

        json jt;
        jt["name"] = e.name;
        jt["csv"] = e.name + ".csv";
        jt["columns"] = t.header;
        jt["primary_key"] = json::array({pk});
        jt["foreign_keys"] = json::array();
        manifest["tables"].push_back(jt);
    }

    for (const auto& r : spec.relationships) {
        const SynthEntity& from = *entity_by_name.at(r.from);
        const SynthEntity& to = *entity_by_name.at(r.to);
        std::string from_pk = lower(r.from) + "_id";
        std::string to_pk = lower(r.to) + "_id";
        std::string col_from = from_pk;
        std::string col_to = to_pk;
        if (r.from == r.to) {  // self relationship needs distinct column names
            col_from = from_pk + "1";
            col_to = to_pk + "2";
        }
        csv::Table t;
        t.header = {col_from, col_to};
        for (const auto& a : r.attributes) t.header.push_back(a.name);
        for (int i = 0; i < from.size; ++i) {
            for (int j = 0; j < to.size; ++j) {
                if (!rng.bernoulli(r.density)) continue;
                std::vector<std::string> row;
                row.push_back(r.from + std::to_string(i + 1));
                row.push_back(r.to + std::to_string(j + 1));
                std::map<std::string, int> rel_values;
                for (const auto& a : r.attributes) {
                    int src = -1;
                    if (a.recipe.kind == SynthRecipe::Kind::NoisyCopy) {
                        const std::string& s = a.recipe.source;
                        if (s.rfind("from:", 0) == 0)
                            src = entity_values.at(r.from)[i].at(s.substr(5));
                        else if (s.rfind("to:", 0) == 0)
                            src = entity_values.at(r.to)[j].at(s.substr(3));
                        else
                            src = rel_values.at(s);
                    }
                    int v = sample_attr(a, src);
                    rel_values[a.name] = v;
                    row.push_back(value_name(v));
                }
                t.rows.push_back(std::move(row));
            }
        }
        csv::write_file((fs::path(out_dir) / (r.name + ".csv")).string(), t);

        json jt;
        jt["name"] = r.name;
        jt["csv"] = r.name + ".csv";
        jt["columns"] = t.header;
        jt["primary_key"] = json::array({col_from, col_to});
        jt["foreign_keys"] = json::array();
        jt["foreign_keys"].push_back(
            {{"column", col_from}, {"references_table", r.from}, {"references_column", from_pk}});
        jt["foreign_keys"].push_back(
            {{"column", col_to}, {"references_table", r.to}, {"references_column", to_pk}});
        manifest["tables"].push_back(jt);
    }

    std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
    {
        std::ofstream out(manifest_path, std::ios::trunc);
        if (!out) fail_validation("cannot write " + manifest_path);
        out << manifest.dump(2) << "\n";
    }

    if (spec.test_split) {
        const SynthEntity& e = *entity_by_name.at(spec.test_split->entity);
        if (spec.test_split->count > e.size)
            fail_validation("synthetic spec: test_split count exceeds the population of " +
                            e.name);
        std::vector<int> ids(e.size);
        for (int i = 0; i < e.size; ++i) ids[i] = i;
        for (size_t i = ids.size(); i > 1; --i)
            std::swap(ids[i - 1], ids[rng.uniform_int(i)]);
        ids.resize(spec.test_split->count);
        std::sort(ids.begin(), ids.end());

        std::string target = spec.test_split->attribute + "(" + e.name + "0)";
        std::vector<TestInstance> instances;
        for (int i : ids) {
            TestInstance inst;
            inst.target_par_rv = target;
            inst.entity_id = e.name + std::to_string(i + 1);
            inst.true_label = value_name(entity_values.at(e.name)[i].at(spec.test_split->attribute));
            instances.push_back(std::move(inst));
        }
        save_test_split(instances, (fs::path(out_dir) / "test_split.csv").string());
    }
    return manifest_path;
}

}  // namespace relbn
