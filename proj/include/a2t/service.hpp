#ifndef A2T_SERVICE_HPP
#define A2T_SERVICE_HPP

// HTTP API over the campaign store. Writes go through one appender per
// campaign and are fsync'd before the client sees 200; reads use an
// immutable copy of the effective state that is swapped after each append.

#include <a2t/annotation.hpp>
#include <a2t/error.hpp>
#include <a2t/io.hpp>
#include <a2t/store.hpp>

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace a2t::service {

namespace fs = std::filesystem;
using annotation::Campaign;
using annotation::EffectiveState;

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    fs::path data_dir = "a2t-data";
    std::int64_t session_ttl_seconds = 8 * 3600;
    std::size_t snapshot_every = 50;  // appends between snapshot rewrites
    std::string admin_token;          // required for export; empty disables export
};

inline json config_to_json(const ServiceConfig& c) {
    return {{"host", c.host},
            {"port", c.port},
            {"data_dir", c.data_dir.string()},
            {"session_ttl_seconds", c.session_ttl_seconds},
            {"snapshot_every", c.snapshot_every},
            {"admin_token", c.admin_token.empty() ? "" : "<set>"}};
}

inline ServiceConfig config_from_json(const json& j) {
    ServiceConfig c;
    try {
        c.host = j.value("host", c.host);
        c.port = j.value("port", c.port);
        c.data_dir = j.value("data_dir", c.data_dir.string());
        c.session_ttl_seconds = j.value("session_ttl_seconds", c.session_ttl_seconds);
        c.snapshot_every = j.value("snapshot_every", c.snapshot_every);
        c.admin_token = j.value("admin_token", c.admin_token);
    } catch (const json::exception& e) {
        fail_usage("bad_config", std::string("service config: ") + e.what());
    }
    if (c.port < 0 || c.port > 65535) fail_usage("bad_config", "port out of range");
    if (c.session_ttl_seconds <= 0) fail_usage("bad_config", "session_ttl_seconds must be positive");
    if (c.snapshot_every == 0) fail_usage("bad_config", "snapshot_every must be positive");
    return c;
}

// A2T_PORT and A2T_DATA_DIR win over the file.
inline void apply_env_overrides(ServiceConfig& c, const std::function<const char*(const char*)>& getenv = ::getenv) {
    if (const char* p = getenv("A2T_PORT"); p && *p) {
        c.port = static_cast<int>(parse_int(p, "A2T_PORT"));
        if (c.port < 0 || c.port > 65535) fail_usage("bad_config", "A2T_PORT out of range");
    }
    if (const char* d = getenv("A2T_DATA_DIR"); d && *d) c.data_dir = d;
}

inline std::int64_t unix_now() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

struct Session {
    std::string annotator_id;
    std::string campaign_id;
    std::int64_t expires_at = 0;
};

class Service {
public:
    explicit Service(ServiceConfig cfg, std::function<std::int64_t()> clock = unix_now)
        : cfg_(std::move(cfg)), clock_(std::move(clock)), keys_(store::AccessKeys::load(cfg_.data_dir)) {
        for (const auto& id : store::list_campaigns(cfg_.data_dir)) {
            auto live = std::make_unique<Live>();
            live->campaign = store::load_campaign(cfg_.data_dir, id);
            live->log = annotation::JudgmentLog::open(store::log_path(cfg_.data_dir, id));
            for (const auto& e : live->log.entries()) {
                try {
                    annotation::validate(live->campaign, e.judgment);
                } catch (const Error& err) {
                    fail_data("corrupt_store", "campaign '" + id + "' log entry " + std::to_string(e.seq) +
                                                   " does not fit the campaign: " + err.what());
                }
            }
            live->state = std::make_shared<const EffectiveState>(annotation::replay(live->log.entries()));
            store::write_snapshot(cfg_.data_dir, id, live->log.size(), *live->state);
            campaigns_.emplace(id, std::move(live));
        }
        routes();
    }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Binds without serving; port 0 picks a free port. Returns the bound port.
    int bind() {
        int port = cfg_.port;
        if (port == 0) {
            port = http_.bind_to_any_port(cfg_.host);
            if (port < 0) fail_data("port_busy", "could not bind any port on " + cfg_.host);
        } else if (!http_.bind_to_port(cfg_.host, port)) {
            fail_data("port_busy", "cannot bind " + cfg_.host + ":" + std::to_string(port));
        }
        port_ = port;
        return port;
    }

    void serve() { http_.listen_after_bind(); }
    void stop() { http_.stop(); }
    void wait_until_ready() { http_.wait_until_ready(); }
    int port() const noexcept { return port_; }
    const ServiceConfig& config() const noexcept { return cfg_; }

private:
    struct Live {
        Campaign campaign;
        annotation::JudgmentLog log;
        std::mutex write_mu;
        mutable std::mutex state_mu;
        std::shared_ptr<const EffectiveState> state;
        std::size_t since_snapshot = 0;

        std::shared_ptr<const EffectiveState> snapshot() const {
            std::lock_guard lock(state_mu);
            return state;
        }
    };

    static void reply_json(httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void reply_error(httplib::Response& res, int status, const std::string& reason, const std::string& message) {
        reply_json(res, status, {{"error", reason}, {"message", message}});
    }

    Live* find(const std::string& id, httplib::Response& res) {
        const auto it = campaigns_.find(id);
        if (it == campaigns_.end()) {
            reply_error(res, 404, "unknown_campaign", "no campaign '" + id + "'");
            return nullptr;
        }
        return it->second.get();
    }

    std::optional<Session> authenticate(const httplib::Request& req, httplib::Response& res, const std::string& campaign) {
        const auto h = req.get_header_value("Authorization");
        if (h.rfind("Bearer ", 0) != 0) {
            reply_error(res, 401, "missing_token", "Authorization: Bearer <token> required");
            return std::nullopt;
        }
        const auto token = h.substr(7);
        std::lock_guard lock(sessions_mu_);
        const auto it = sessions_.find(token);
        if (it == sessions_.end()) {
            reply_error(res, 401, "invalid_token", "unknown session token");
            return std::nullopt;
        }
        if (clock_() >= it->second.expires_at) {
            sessions_.erase(it);
            reply_error(res, 401, "session_expired", "session expired; request a new one");
            return std::nullopt;
        }
        if (it->second.campaign_id != campaign) {
            reply_error(res, 403, "wrong_campaign", "session belongs to another campaign");
            return std::nullopt;
        }
        return it->second;
    }

    bool is_admin(const httplib::Request& req) const {
        if (cfg_.admin_token.empty()) return false;
        return req.get_header_value("Authorization") == "Bearer " + cfg_.admin_token;
    }

    // An instance is done when every criterion the annotator owes is present.
    static bool instance_done(const Campaign& c, const EffectiveState& s, const std::string& iid, const std::string& ann) {
        if (c.kind != annotation::TaskKind::Ranking) return s.contains({iid, ann, ""});
        for (const auto& crit : c.criteria)
            if (!s.contains({iid, ann, crit})) return false;
        return true;
    }

    void routes() {
        http_.set_payload_max_length(1 << 20);
        // httplib's default also sets SO_REUSEPORT, which would let a second
        // server share the port silently
        http_.set_socket_options([](socket_t sock) {
            int yes = 1;
            ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
        });

        http_.Post("/auth/session", [this](const httplib::Request& req, httplib::Response& res) {
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::parse_error&) {
                return reply_error(res, 400, "bad_json", "body is not JSON");
            }
            if (!body.is_object() || !body.contains("annotator_id") || !body.contains("access_key") ||
                !body.contains("campaign_id") || !body["annotator_id"].is_string() || !body["access_key"].is_string() ||
                !body["campaign_id"].is_string())
                return reply_error(res, 400, "bad_request", "need annotator_id, access_key and campaign_id strings");
            const auto ann = body["annotator_id"].get<std::string>();
            const auto cid = body["campaign_id"].get<std::string>();
            if (!keys_.verify(ann, body["access_key"].get<std::string>()))
                return reply_error(res, 401, "bad_credentials", "unknown annotator or wrong access key");
            auto* live = find(cid, res);
            if (!live) return;
            if (!live->campaign.annotators().contains(ann))
                return reply_error(res, 403, "not_in_campaign", "annotator has no assignments in '" + cid + "'");
            Session s{ann, cid, clock_() + cfg_.session_ttl_seconds};
            const auto token = store::random_hex(32);
            {
                std::lock_guard lock(sessions_mu_);
                sessions_[token] = s;
            }
            reply_json(res, 201, {{"token", token}, {"expires_at", s.expires_at}, {"annotator_id", ann}});
        });

        http_.Get("/campaigns", [this](const httplib::Request&, httplib::Response& res) {
            json out = json::array();
            for (const auto& [id, live] : campaigns_) {
                const auto& c = live->campaign;
                out.push_back({{"id", id},
                               {"kind", annotation::to_string(c.kind)},
                               {"instances", c.instances.size()},
                               {"criteria", c.criteria}});
            }
            reply_json(res, 200, {{"campaigns", out}});
        });

        http_.Get(R"(/campaigns/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
            auto* live = find(req.matches[1], res);
            if (!live) return;
            const auto session = authenticate(req, res, live->campaign.id);
            if (!session) return;
            const auto ann = req.has_param("annotator") ? req.get_param_value("annotator") : session->annotator_id;
            if (ann != session->annotator_id)
                return reply_error(res, 403, "annotator_mismatch", "token does not belong to '" + ann + "'");
            const auto state = live->snapshot();
            const auto mine = live->campaign.instances_for(ann);
            std::size_t done = 0;
            const annotation::TaskInstance* next = nullptr;
            for (const auto& iid : mine) {
                if (instance_done(live->campaign, *state, iid, ann))
                    ++done;
                else if (!next)
                    next = live->campaign.find_instance(iid);
            }
            json body{{"done", next == nullptr}, {"progress", {{"assigned", mine.size()}, {"completed", done}}}};
            body["task"] = next ? annotation::task_view(live->campaign, *next, ann) : json(nullptr);
            reply_json(res, 200, body);
        });

        http_.Post(R"(/campaigns/([^/]+)/judgments)", [this](const httplib::Request& req, httplib::Response& res) {
            auto* live = find(req.matches[1], res);
            if (!live) return;
            const auto session = authenticate(req, res, live->campaign.id);
            if (!session) return;
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::parse_error&) {
                return reply_error(res, 400, "bad_json", "body is not JSON");
            }
            if (!body.is_object() || !body.contains("judgment") || !body["judgment"].is_object())
                return reply_error(res, 400, "bad_request", "body needs a 'judgment' object");
            auto jj = body["judgment"];
            if (!jj.contains("annotator_id")) jj["annotator_id"] = session->annotator_id;
            std::string key = body.value("idempotency_key", std::string());
            if (key.empty()) key = req.get_header_value("Idempotency-Key");
            annotation::Judgment j;
            try {
                j = annotation::judgment_from_json(jj);
                if (annotation::annotator_of(j) != session->annotator_id)
                    return reply_error(res, 403, "annotator_mismatch", "judgment annotator differs from the session");
                std::visit([&](auto& x) { x.timestamp = clock_(); }, j);
                annotation::validate(live->campaign, j);
            } catch (const Error& e) {
                return reply_error(res, 422, e.reason(), e.what());
            }
            annotation::Receipt receipt;
            try {
                std::lock_guard lock(live->write_mu);
                receipt = live->log.append(j, key);
                if (!receipt.duplicate) {
                    auto next = std::make_shared<EffectiveState>(*live->snapshot());
                    next->insert_or_assign(annotation::key_of(j), j);
                    {
                        std::lock_guard slock(live->state_mu);
                        live->state = next;
                    }
                    if (++live->since_snapshot >= cfg_.snapshot_every) {
                        store::write_snapshot(cfg_.data_dir, live->campaign.id, live->log.size(), *next);
                        live->since_snapshot = 0;
                    }
                }
            } catch (const Error& e) {
                return reply_error(res, 503, e.reason(), e.what());
            }
            reply_json(res, 200,
                       {{"seq", receipt.seq}, {"replaced_previous", receipt.replaced_previous}, {"duplicate", receipt.duplicate}});
        });

        http_.Get(R"(/campaigns/([^/]+)/progress)", [this](const httplib::Request& req, httplib::Response& res) {
            auto* live = find(req.matches[1], res);
            if (!live) return;
            const auto& c = live->campaign;
            const auto state = live->snapshot();
            const std::size_t per = c.kind == annotation::TaskKind::Ranking ? c.criteria.size() : 1;
            json anns = json::object();
            std::size_t expected = 0, complete = 0;
            for (const auto& ann : c.annotators()) {
                const auto mine = c.instances_for(ann);
                std::size_t done = 0;
                for (const auto& iid : mine) done += instance_done(c, *state, iid, ann);
                anns[ann] = {{"assigned", mine.size()}, {"completed", done}};
            }
            for (const auto& inst : c.instances) {
                const auto it = c.assignment.find(inst.id);
                if (it == c.assignment.end()) continue;
                expected += it->second.size() * per;
                bool all = true;
                for (const auto& ann : it->second) all = all && instance_done(c, *state, inst.id, ann);
                complete += all;
            }
            reply_json(res, 200,
                       {{"campaign_id", c.id},
                        {"instances", c.instances.size()},
                        {"complete_instances", complete},
                        {"judgments_expected", expected},
                        {"judgments_received", state->size()},
                        {"annotators", anns}});
        });

        http_.Get(R"(/campaigns/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
            auto* live = find(req.matches[1], res);
            if (!live) return;
            if (cfg_.admin_token.empty()) return reply_error(res, 403, "export_disabled", "no admin token configured");
            if (!is_admin(req)) return reply_error(res, 401, "admin_required", "export needs the admin token");
            const auto view = req.has_param("view") ? req.get_param_value("view") : "annotator";
            if (view != "annotator" && view != "analysis")
                return reply_error(res, 400, "bad_view", "view must be annotator or analysis");
            const auto v = view == "analysis" ? annotation::ExportView::Analysis : annotation::ExportView::Annotator;
            res.status = 200;
            res.set_content(annotation::export_csv(live->campaign, *live->snapshot(), v), "text/csv");
        });

        http_.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string msg = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                msg = e.what();
            } catch (...) {
            }
            reply_error(res, 500, "internal", msg);
        });
    }

    ServiceConfig cfg_;
    std::function<std::int64_t()> clock_;
    store::AccessKeys keys_;
    std::map<std::string, std::unique_ptr<Live>> campaigns_;  // fixed after construction
    std::mutex sessions_mu_;
    std::map<std::string, Session> sessions_;
    httplib::Server http_;
    int port_ = -1;
};

} // namespace a2t::service

#endif // A2T_SERVICE_HPP
