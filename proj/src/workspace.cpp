#include "relbn/workspace.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "relbn/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace relbn {

uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::MissingDependency, "cannot open input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(buf.str())));
    return hex;
}

void StageManifest::add_input(const std::string& path) { inputs[path] = file_hash_hex(path); }

void StageManifest::write(const std::string& dir) const {
    json doc;
    doc["stage"] = stage;
    doc["inputs"] = inputs;
    doc["params"] = params;
    std::ofstream out(fs::path(dir) / "_manifest.json", std::ios::trunc);
    if (!out) fail_validation("cannot write stage manifest in " + dir);
    out << doc.dump(2) << "\n";
}

StageManifest StageManifest::read(const std::string& dir, const std::string& expected_stage) {
    fs::path p = fs::path(dir) / "_manifest.json";
    std::ifstream in(p);
    if (!in)
        fail(ErrorKind::MissingDependency,
             "missing artifact " + p.string() + "; run the " + expected_stage + " stage first");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        fail_validation("malformed stage manifest " + p.string() + ": " + e.what());
    }
    StageManifest m;
    m.stage = doc.value("stage", "");
    if (m.stage != expected_stage)
        fail(ErrorKind::MissingDependency, p.string() + " was written by stage \"" + m.stage +
                                               "\", expected \"" + expected_stage +
                                               "\"; run the " + expected_stage + " stage first");
    if (doc.contains("inputs"))
        m.inputs = doc["inputs"].get<std::map<std::string, std::string>>();
    if (doc.contains("params")) m.params = doc["params"];
    return m;
}

void StageManifest::verify_inputs_fresh() const {
    for (const auto& [path, hash] : inputs) {
        if (file_hash_hex(path) != hash)
            fail(ErrorKind::MissingDependency,
                 "input " + path + " changed since the " + stage +
                     " stage ran; rerun the " + stage + " stage");
    }
}

void prepare_stage_dir(const std::string& dir, bool overwrite) {
    if (fs::exists(dir)) {
        if (!overwrite)
            fail_validation("output directory " + dir +
                            " already exists; pass --overwrite to replace it");
        fs::remove_all(dir);
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail_validation("cannot create directory " + dir + ": " + ec.message());
}

}  // namespace relbn
