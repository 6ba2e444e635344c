#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace relbn {

uint64_t fnv1a64(std::string_view data);
std::string file_hash_hex(const std::string& path);

// Every pipeline stage writes a _manifest.json into its output directory:
// the stage name, the hash of every input file, and the stage parameters.
// Downstream stages verify those hashes so stale artifacts are detected.
struct StageManifest {
    std::string stage;
    std::map<std::string, std::string> inputs;  // path -> hash hex
    nlohmann::json params;

    void add_input(const std::string& path);
    void write(const std::string& dir) const;
    static StageManifest read(const std::string& dir, const std::string& expected_stage);

    // Fails with a MissingDependency error naming the stage when any
    // recorded input has changed on disk.
    void verify_inputs_fresh() const;
};

// Prepares a stage output directory. Refuses to clobber an existing
// directory unless overwrite is set.
void prepare_stage_dir(const std::string& dir, bool overwrite);

}  // namespace relbn
