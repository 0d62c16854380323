#ifndef A2T_EMBEDDING_CLIENT_HPP
#define A2T_EMBEDDING_CLIENT_HPP

// Optional HTTP embedding provider: POST {"texts": [...]} to a URL, expect
// {"vectors": [[...], ...]} back. Vectors are cached on disk under the
// SHA-256 of the text, so repeated runs never re-request a text.

#include <a2t/a2tmetric.hpp>
#include <a2t/error.hpp>
#include <a2t/io.hpp>

#include <httplib.h>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace a2t::metric {

struct EmbeddingEndpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // "/..." (defaults to "/")
};

inline EmbeddingEndpoint parse_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) fail_usage("bad_url", "embedding URL needs a scheme: '" + url + "'");
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

class EmbeddingClient {
public:
    EmbeddingClient(const std::string& url, std::filesystem::path cache_dir, std::size_t batch_size = 64)
        : endpoint_(parse_endpoint(url)), cache_dir_(std::move(cache_dir)), batch_size_(batch_size) {
        std::filesystem::create_directories(cache_dir_);
    }

    std::size_t requests_made() const noexcept { return requests_; }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) {
        std::vector<std::vector<double>> out(texts.size());
        std::vector<std::size_t> missing;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (auto v = cached(texts[i]))
                out[i] = std::move(*v);
            else
                missing.push_back(i);
        }
        for (std::size_t start = 0; start < missing.size(); start += batch_size_) {
            const auto end = std::min(missing.size(), start + batch_size_);
            json body{{"texts", json::array()}};
            for (std::size_t k = start; k < end; ++k) body["texts"].push_back(texts[missing[k]]);
            const auto vectors = post(body, end - start);
            for (std::size_t k = start; k < end; ++k) {
                out[missing[k]] = vectors[k - start];
                store(texts[missing[k]], vectors[k - start]);
            }
        }
        return out;
    }

private:
    std::filesystem::path cache_path(const std::string& text) const { return cache_dir_ / (sha256_hex(text) + ".json"); }

    std::optional<std::vector<double>> cached(const std::string& text) const {
        const auto p = cache_path(text);
        if (!std::filesystem::exists(p)) return std::nullopt;
        try {
            return json::parse(read_file(p)).at("vector").get<std::vector<double>>();
        } catch (const json::exception&) {
            return std::nullopt;  // unreadable cache entry: fetch again
        }
    }

    void store(const std::string& text, const std::vector<double>& v) const {
        const auto p = cache_path(text);
        const auto tmp = p.string() + ".tmp";
        write_file(tmp, json{{"vector", v}}.dump());
        std::filesystem::rename(tmp, p);
    }

    std::vector<std::vector<double>> post(const json& body, std::size_t expected) {
        httplib::Client cli(endpoint_.origin);
        cli.set_connection_timeout(10);
        cli.set_read_timeout(120);
        ++requests_;
        const auto res = cli.Post(endpoint_.path, body.dump(), "application/json");
        if (!res) fail_data("embedding_unreachable", "embedding request to " + endpoint_.origin + " failed: " +
                                                         httplib::to_string(res.error()));
        if (res->status != 200)
            fail_data("embedding_http_error", "embedding service returned HTTP " + std::to_string(res->status));
        try {
            auto vectors = json::parse(res->body).at("vectors").get<std::vector<std::vector<double>>>();
            if (vectors.size() != expected)
                fail_data("embedding_bad_response", "asked for " + std::to_string(expected) + " vectors, got " +
                                                        std::to_string(vectors.size()));
            for (const auto& v : vectors)
                for (double x : v)
                    if (!std::isfinite(x)) fail_data("non_finite_embedding", "embedding service returned a non-finite value");
            return vectors;
        } catch (const json::exception& e) {
            fail_data("embedding_bad_response", std::string("malformed embedding response: ") + e.what());
        }
    }

    EmbeddingEndpoint endpoint_;
    std::filesystem::path cache_dir_;
    std::size_t batch_size_;
    std::size_t requests_ = 0;
};

} // namespace a2t::metric

#endif // A2T_EMBEDDING_CLIENT_HPP
