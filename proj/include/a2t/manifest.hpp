#ifndef A2T_MANIFEST_HPP
#define A2T_MANIFEST_HPP

// Run manifest written next to every CLI output: the exact argv, resolved
// config, and SHA-256 of every input and output. No timestamps or host
// details, so rerunning a command writes a byte-identical manifest.

#include <a2t/error.hpp>
#include <a2t/io.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace a2t {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct FileDigest {
    std::string path;
    std::string sha256;
};

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;  // without the program name
    json config = json::object();
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;

    void add_input(const std::filesystem::path& p) { inputs.push_back({p.string(), sha256_file(p)}); }
    void add_output(const std::filesystem::path& p) { outputs.push_back({p.string(), sha256_file(p)}); }
};

inline json manifest_to_json(const RunManifest& m) {
    auto files = [](const std::vector<FileDigest>& fs) {
        json a = json::array();
        for (const auto& f : fs) a.push_back({{"path", f.path}, {"sha256", f.sha256}});
        return a;
    };
    return json{{"format", "a2t-manifest"},
                {"version", 1},
                {"tool_version", kToolVersion},
                {"command", m.command},
                {"argv", m.argv},
                {"config", m.config},
                {"inputs", files(m.inputs)},
                {"outputs", files(m.outputs)}};
}

inline RunManifest manifest_from_json(const json& j) {
    try {
        if (j.value("format", std::string()) != "a2t-manifest")
            fail_data("bad_manifest", "not an a2t-manifest document");
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.argv = j.at("argv").get<std::vector<std::string>>();
        m.config = j.at("config");
        for (const auto& f : j.at("inputs")) m.inputs.push_back({f.at("path"), f.at("sha256")});
        for (const auto& f : j.at("outputs")) m.outputs.push_back({f.at("path"), f.at("sha256")});
        return m;
    } catch (const json::exception& e) {
        fail_data("bad_manifest", std::string("manifest: ") + e.what());
    }
}

// nlohmann's object keys are sorted, so dump() is already canonical.
inline void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    write_file(path, manifest_to_json(m).dump(2) + "\n");
}

inline RunManifest read_manifest(const std::filesystem::path& path) {
    try {
        return manifest_from_json(json::parse(read_file(path)));
    } catch (const json::parse_error& e) {
        fail_data("bad_manifest", path.string() + ": " + e.what());
    }
}

} // namespace a2t

#endif // A2T_MANIFEST_HPP
