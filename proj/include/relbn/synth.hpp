#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace relbn {

// Dependency recipe for a generated attribute. NoisyCopy plants a strong
// association with the source attribute: with probability 1-noise the value
// index mirrors the source, otherwise it is uniform.
struct SynthRecipe {
    enum class Kind { Uniform, NoisyCopy };
    Kind kind = Kind::Uniform;
    std::string source;  // earlier attribute; relationships also accept
                         // "from:<attr>" / "to:<attr>" endpoint references
    double noise = 0.0;
};

struct SynthAttribute {
    std::string name;
    int domain_size = 2;
    SynthRecipe recipe;
};

struct SynthEntity {
    std::string name;
    int size = 1;
    std::vector<SynthAttribute> attributes;
};

struct SynthRelationship {
    std::string name;
    std::string from;
    std::string to;
    double density = 0.5;  // independent tuple probability per entity pair
    std::vector<SynthAttribute> attributes;
};

struct SynthTestSplit {
    std::string entity;
    std::string attribute;
    int count = 0;
};

struct SynthSpec {
    uint64_t seed = 0;
    std::vector<SynthEntity> entities;
    std::vector<SynthRelationship> relationships;
    std::optional<SynthTestSplit> test_split;

    static SynthSpec parse(const std::string& json_text, const std::string& origin);
    static SynthSpec load(const std::string& path);
    void validate() const;
};

// Writes manifest.json, one CSV per table, and test_split.csv when requested.
// Same spec and seed produce byte-identical output. Returns the manifest path.
std::string generate_dataset(const SynthSpec& spec, const std::string& out_dir);

}  // namespace relbn
