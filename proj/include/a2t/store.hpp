#ifndef A2T_STORE_HPP
#define A2T_STORE_HPP

// File-backed campaign store shared by the CLI and the HTTP service.
//
//   <data_dir>/campaigns/<id>/campaign.json    campaign definition
//   <data_dir>/campaigns/<id>/judgments.jsonl  append-only judgment log
//   <data_dir>/campaigns/<id>/snapshot.jsonl   effective state, rewritten periodically
//   <data_dir>/annotators.json                 SHA-256 of each annotator's access key

#include <a2t/annotation.hpp>
#include <a2t/error.hpp>
#include <a2t/io.hpp>

#include <openssl/rand.h>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace a2t::store {

namespace fs = std::filesystem;

inline std::string random_hex(std::size_t n_bytes) {
    std::vector<unsigned char> buf(n_bytes);
    if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1) fail_data("rng_failure", "RAND_bytes failed");
    return to_hex(buf);
}

inline bool valid_id(std::string_view id) {
    if (id.empty() || id.size() > 128) return false;
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
    return id != "." && id != "..";
}

inline fs::path campaign_dir(const fs::path& data_dir, const std::string& id) {
    if (!valid_id(id)) fail_usage("bad_id", "campaign id '" + id + "' must be [A-Za-z0-9._-]+");
    return data_dir / "campaigns" / id;
}

inline fs::path log_path(const fs::path& data_dir, const std::string& id) { return campaign_dir(data_dir, id) / "judgments.jsonl"; }
inline fs::path snapshot_path(const fs::path& data_dir, const std::string& id) {
    return campaign_dir(data_dir, id) / "snapshot.jsonl";
}

inline void write_atomic(const fs::path& path, std::string_view content) {
    const auto tmp = path.string() + ".tmp";
    write_file(tmp, content);
    fs::rename(tmp, path);
}

inline void save_campaign(const fs::path& data_dir, const annotation::Campaign& c) {
    const auto dir = campaign_dir(data_dir, c.id);
    fs::create_directories(dir);
    write_atomic(dir / "campaign.json", annotation::campaign_to_json(c).dump(2) + "\n");
}

inline annotation::Campaign load_campaign(const fs::path& data_dir, const std::string& id) {
    const auto p = campaign_dir(data_dir, id) / "campaign.json";
    if (!fs::exists(p)) fail_data("unknown_campaign", "no campaign '" + id + "' under " + data_dir.string());
    try {
        auto c = annotation::campaign_from_json(json::parse(read_file(p)));
        if (c.id != id) fail_data("corrupt_campaign", p.string() + " declares id '" + c.id + "'");
        return c;
    } catch (const json::parse_error& e) {
        fail_data("corrupt_campaign", p.string() + ": " + e.what());
    }
}

inline std::vector<std::string> list_campaigns(const fs::path& data_dir) {
    std::vector<std::string> ids;
    const auto root = data_dir / "campaigns";
    if (!fs::exists(root)) return ids;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "campaign.json")) ids.push_back(e.path().filename().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

inline bool has_judgments(const fs::path& data_dir, const std::string& id) {
    const auto p = log_path(data_dir, id);
    return fs::exists(p) && fs::file_size(p) > 0;
}

// First line {"seq": N}, then the effective state as JSONL.
inline void write_snapshot(const fs::path& data_dir, const std::string& id, std::uint64_t seq,
                           const annotation::EffectiveState& state) {
    write_atomic(snapshot_path(data_dir, id), json{{"seq", seq}}.dump() + "\n" + annotation::state_to_jsonl(state));
}

// --- access keys ----------------------------------------------------------------

class AccessKeys {
public:
    static AccessKeys load(const fs::path& data_dir) {
        AccessKeys k;
        k.path_ = data_dir / "annotators.json";
        if (!fs::exists(k.path_)) return k;
        try {
            const auto j = json::parse(read_file(k.path_));
            for (const auto& [id, v] : j.at("annotators").items()) k.hashes_[id] = v.at("key_sha256").get<std::string>();
        } catch (const json::exception& e) {
            fail_data("corrupt_store", k.path_.string() + ": " + e.what());
        }
        return k;
    }

    bool has(const std::string& annotator) const { return hashes_.contains(annotator); }

    // Returns the new raw key; only its hash is stored.
    std::string issue(const std::string& annotator) {
        if (!valid_id(annotator)) fail_usage("bad_id", "annotator id '" + annotator + "' must be [A-Za-z0-9._-]+");
        auto key = random_hex(24);
        hashes_[annotator] = sha256_hex(key);
        return key;
    }

    bool verify(const std::string& annotator, const std::string& key) const {
        const auto it = hashes_.find(annotator);
        if (it == hashes_.end()) return false;
        const auto h = sha256_hex(key);
        if (h.size() != it->second.size()) return false;
        // constant-time compare of equal-length hex digests
        unsigned char diff = 0;
        for (std::size_t i = 0; i < h.size(); ++i) diff |= static_cast<unsigned char>(h[i] ^ it->second[i]);
        return diff == 0;
    }

    void save() const {
        json a = json::object();
        for (const auto& [id, h] : hashes_) a[id] = {{"key_sha256", h}};
        fs::create_directories(path_.parent_path());
        write_atomic(path_, json{{"format", "a2t-annotators"}, {"version", 1}, {"annotators", a}}.dump(2) + "\n");
    }

private:
    fs::path path_;
    std::map<std::string, std::string> hashes_;
};

} // namespace a2t::store

#endif // A2T_STORE_HPP
