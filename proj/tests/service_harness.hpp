#ifndef A2T_TESTS_SERVICE_HARNESS_HPP
#define A2T_TESTS_SERVICE_HARNESS_HPP

// Scripted-annotator plumbing for the HTTP API: provision a data dir, run a
// service on a free port in a thread, and talk to it like the UI would.

#include <a2t/service.hpp>

#include <thread>

namespace a2t::testing {

// Saves the campaign and issues a key for each of its annotators.
inline std::map<std::string, std::string> provision(const std::filesystem::path& data_dir, const annotation::Campaign& c) {
    store::save_campaign(data_dir, c);
    auto keys = store::AccessKeys::load(data_dir);
    std::map<std::string, std::string> out;
    for (const auto& ann : c.annotators()) out[ann] = keys.issue(ann);
    keys.save();
    return out;
}

class RunningService {
public:
    explicit RunningService(service::ServiceConfig cfg, std::function<std::int64_t()> clock = service::unix_now) {
        cfg.port = 0;
        svc_ = std::make_unique<service::Service>(std::move(cfg), std::move(clock));
        port_ = svc_->bind();
        thread_ = std::thread([this] { svc_->serve(); });
        svc_->wait_until_ready();
    }
    ~RunningService() {
        svc_->stop();
        thread_.join();
    }
    RunningService(const RunningService&) = delete;
    RunningService& operator=(const RunningService&) = delete;

    int port() const { return port_; }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(10);
        return c;
    }

private:
    std::unique_ptr<service::Service> svc_;
    std::thread thread_;
    int port_ = -1;
};

struct ApiResult {
    int status = 0;
    json body;
};

inline ApiResult call(httplib::Client& cli, const std::string& method, const std::string& path, const json* body = nullptr,
                      const std::string& token = {}) {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    httplib::Result r = method == "GET" ? cli.Get(path, h) : cli.Post(path, h, body ? body->dump() : "", "application/json");
    if (!r) return {-1, json(nullptr)};
    ApiResult out{r->status, json(nullptr)};
    try {
        out.body = json::parse(r->body);
    } catch (const json::parse_error&) {
        out.body = r->body;  // CSV export
    }
    return out;
}

inline std::string login(httplib::Client& cli, const std::string& ann, const std::string& key, const std::string& campaign) {
    const json body{{"annotator_id", ann}, {"access_key", key}, {"campaign_id", campaign}};
    const auto r = call(cli, "POST", "/auth/session", &body);
    return r.status == 201 ? r.body.at("token").get<std::string>() : std::string();
}

} // namespace a2t::testing

#endif // A2T_TESTS_SERVICE_HARNESS_HPP
