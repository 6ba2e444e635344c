#pragma once

#include <unistd.h>

#include <array>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "relbn/dataset.hpp"
#include "relbn/schema_analyzer.hpp"
#include "relbn/synth.hpp"
#include "relbn/vdb.hpp"

namespace relbn::test {

inline std::string data_dir() { return RELBN_DATA_DIR; }
inline std::string toy_manifest() { return data_dir() + "/university/manifest.json"; }

inline Dataset load_toy() { return Dataset::load_file(toy_manifest()); }

// A scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("relbn_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

// Writes a dataset directly from inline CSV text and a manifest body.
struct InlineTable {
    std::string name;
    std::string csv_text;  // includes header line
    std::vector<std::string> columns;
    std::vector<std::string> primary_key;
    // (column, referenced_table, referenced_column)
    std::vector<std::array<std::string, 3>> foreign_keys;
};

inline std::string write_inline_dataset(const TempDir& dir,
                                        const std::vector<InlineTable>& tables) {
    std::string manifest = "{\n  \"tables\": [\n";
    for (size_t t = 0; t < tables.size(); ++t) {
        const InlineTable& tab = tables[t];
        {
            std::ofstream out(dir.path() / (tab.name + ".csv"), std::ios::trunc);
            out << tab.csv_text;
        }
        manifest += "    {\"name\": \"" + tab.name + "\", \"csv\": \"" + tab.name + ".csv\",\n";
        manifest += "     \"columns\": [";
        for (size_t i = 0; i < tab.columns.size(); ++i)
            manifest += (i ? ", " : "") + ("\"" + tab.columns[i] + "\"");
        manifest += "],\n     \"primary_key\": [";
        for (size_t i = 0; i < tab.primary_key.size(); ++i)
            manifest += (i ? ", " : "") + ("\"" + tab.primary_key[i] + "\"");
        manifest += "],\n     \"foreign_keys\": [";
        for (size_t i = 0; i < tab.foreign_keys.size(); ++i) {
            const auto& fk = tab.foreign_keys[i];
            manifest += std::string(i ? ", " : "") + "{\"column\": \"" + fk[0] +
                        "\", \"references_table\": \"" + fk[1] +
                        "\", \"references_column\": \"" + fk[2] + "\"}";
        }
        manifest += "]}";
        manifest += (t + 1 < tables.size()) ? ",\n" : "\n";
    }
    manifest += "  ]\n}\n";
    std::string path = (dir.path() / "manifest.json").string();
    std::ofstream out(path, std::ios::trunc);
    out << manifest;
    out.close();
    return path;
}

// Seeded synthetic-schema suite used by the oracle-equivalence and learner
// acceptance criteria: the shape cycles with the seed, all instances stay
// at or below 10^4 groundings.
inline SynthSpec suite_spec(uint64_t seed) {
    SynthSpec spec;
    spec.seed = seed;
    auto uniform = [](const std::string& name, int k) {
        SynthAttribute a;
        a.name = name;
        a.domain_size = k;
        return a;
    };
    auto noisy = [](const std::string& name, int k, const std::string& src, double noise) {
        SynthAttribute a;
        a.name = name;
        a.domain_size = k;
        a.recipe = {SynthRecipe::Kind::NoisyCopy, src, noise};
        return a;
    };
    int shape = static_cast<int>(seed % 5);
    int size_a = 6 + static_cast<int>(seed % 7);
    int size_b = 5 + static_cast<int>((seed / 5) % 6);
    double density = 0.15 + 0.1 * static_cast<double>(seed % 6);
    switch (shape) {
        case 0: {  // single entity, chain of attributes
            SynthEntity a{"A", size_a + 10, {}};
            a.attributes = {uniform("x", 3), noisy("y", 3, "x", 0.2), uniform("z", 2)};
            spec.entities = {a};
            break;
        }
        case 1: {  // one relationship with attributes
            SynthEntity a{"A", size_a, {}};
            a.attributes = {uniform("x", 3)};
            SynthEntity b{"B", size_b, {}};
            b.attributes = {uniform("y", 2)};
            spec.entities = {a, b};
            SynthRelationship r{"R", "A", "B", density, {}};
            r.attributes = {noisy("w", 2, "from:x", 0.25)};
            spec.relationships = {r};
            break;
        }
        case 2: {  // self relationship
            SynthEntity u{"U", size_a, {}};
            u.attributes = {uniform("age", 3)};
            spec.entities = {u};
            SynthRelationship f{"F", "U", "U", density, {}};
            f.attributes = {uniform("kind", 2)};
            spec.relationships = {f};
            break;
        }
        case 3: {  // two relationships over the same pair
            SynthEntity a{"A", size_a, {}};
            a.attributes = {uniform("x", 2)};
            SynthEntity b{"B", size_b, {}};
            b.attributes = {uniform("y", 2)};
            spec.entities = {a, b};
            SynthRelationship r1{"R1", "A", "B", density, {}};
            SynthRelationship r2{"R2", "A", "B", 0.9 - density / 2, {}};
            r2.attributes = {noisy("w", 2, "to:y", 0.3)};
            spec.relationships = {r1, r2};
            break;
        }
        default: {  // chain A-R1-B-R2-C
            SynthEntity a{"A", 5 + static_cast<int>(seed % 4), {}};
            a.attributes = {uniform("x", 2)};
            SynthEntity b{"B", 5 + static_cast<int>((seed / 3) % 4), {}};
            b.attributes = {uniform("y", 2)};
            SynthEntity c{"C", 4 + static_cast<int>((seed / 7) % 4), {}};
            c.attributes = {uniform("z", 3)};
            spec.entities = {a, b, c};
            SynthRelationship r1{"R1", "A", "B", density, {}};
            SynthRelationship r2{"R2", "B", "C", 0.8 - density / 2, {}};
            spec.relationships = {r1, r2};
            break;
        }
    }
    return spec;
}

}  // namespace relbn::test
