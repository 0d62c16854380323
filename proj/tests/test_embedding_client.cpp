#include <a2t/embedding_client.hpp>

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

using namespace a2t;

namespace {

// Fake provider: vector = [text length, number of texts in the request].
class FakeProvider {
public:
    FakeProvider() {
        server_.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
            ++calls_;
            const auto body = json::parse(req.body);
            json vectors = json::array();
            for (const auto& t : body.at("texts"))
                vectors.push_back({static_cast<double>(t.get<std::string>().size()), static_cast<double>(body["texts"].size())});
            res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
        });
        server_.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("{\"vectors\": [[1.0]]}", "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeProvider() {
        server_.stop();
        thread_.join();
    }
    std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }
    int calls() const { return calls_; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<int> calls_{0};
};

} // namespace

TEST(EmbeddingClient, BatchesAndCachesByTextHash) {
    FakeProvider provider;
    a2t::testing::TempDir dir;
    metric::EmbeddingClient client(provider.url("/v1/embed"), dir / "cache", 2);
    const auto v = client.embed({"abc", "hello", "x"});
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(v[0][0], 3.0);
    EXPECT_EQ(v[2][0], 1.0);
    EXPECT_EQ(provider.calls(), 2);  // batches of 2 + 1

    metric::EmbeddingClient again(provider.url("/v1/embed"), dir / "cache", 2);
    const auto w = again.embed({"hello", "abc", "new text"});
    EXPECT_EQ(w[0], v[1]);
    EXPECT_EQ(again.requests_made(), 1u);
    EXPECT_EQ(provider.calls(), 3);
    EXPECT_TRUE(std::filesystem::exists(dir / "cache" / (sha256_hex("hello") + ".json")));
}

TEST(EmbeddingClient, ErrorsAreReported) {
    FakeProvider provider;
    a2t::testing::TempDir dir;
    metric::EmbeddingClient wrong_count(provider.url("/broken"), dir / "c1");
    try {
        wrong_count.embed({"a", "b"});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.reason(), "embedding_bad_response");
    }
    metric::EmbeddingClient missing(provider.url("/nope"), dir / "c2");
    EXPECT_THROW(missing.embed({"a"}), Error);
    EXPECT_THROW(metric::EmbeddingClient("localhost:1", dir / "c3"), Error);
}
