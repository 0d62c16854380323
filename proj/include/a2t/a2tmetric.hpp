#ifndef A2T_A2TMETRIC_HPP
#define A2T_A2TMETRIC_HPP

// Reference-free title metric: a two-layer projection (affine, tanh,
// affine) over frozen sentence embeddings, trained so that the better title
// of each relative-ranking pair lands closer to its abstract. Score is the
// negated Euclidean distance in the projected space.

#include <a2t/error.hpp>
#include <a2t/io.hpp>
#include <a2t/random.hpp>
#include <a2t/relative_ranking.hpp>
#include <a2t/stats.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace a2t::metric {

// --- embeddings ----------------------------------------------------------------

class EmbeddingStore {
public:
    EmbeddingStore() = default;
    explicit EmbeddingStore(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return vectors_.size(); }
    bool contains(const std::string& id) const { return vectors_.contains(id); }

    void add(const std::string& id, std::vector<double> v) {
        if (dim_ == 0) dim_ = v.size();
        if (v.size() != dim_)
            fail_data("dim_mismatch", "embedding '" + id + "' has dim " + std::to_string(v.size()) + ", store dim is " +
                                          std::to_string(dim_));
        for (double x : v)
            if (!std::isfinite(x)) fail_data("non_finite_embedding", "embedding '" + id + "' has a non-finite value");
        if (!vectors_.emplace(id, std::move(v)).second) fail_data("duplicate_id", "duplicate embedding id '" + id + "'");
        order_.push_back(id);
    }

    const std::vector<double>& get(const std::string& id) const {
        const auto it = vectors_.find(id);
        if (it == vectors_.end()) fail_data("missing_embedding", "no embedding for '" + id + "'");
        return it->second;
    }

    const std::vector<std::string>& ids() const noexcept { return order_; }

    // First line {"dim": N}, then one {"id": ..., "vector": [...]} per line.
    static EmbeddingStore parse_jsonl(std::string_view text) {
        EmbeddingStore store;
        bool header = false;
        for_each_jsonl(text, [&](const json& o, std::size_t line) {
            if (!header) {
                if (!o.contains("dim"))
                    fail_data("missing_header", "embedding store line " + std::to_string(line) + ": expected {\"dim\": N}");
                const auto d = field_as<long long>(o, "dim", line);
                if (d <= 0) fail_data("bad_dim", "embedding dim must be positive");
                store.dim_ = static_cast<std::size_t>(d);
                header = true;
                return;
            }
            auto v = field_as<std::vector<double>>(o, "vector", line);
            const auto id = field_as<std::string>(o, "id", line);
            if (v.size() != store.dim_)
                fail_data("dim_mismatch", "line " + std::to_string(line) + ": embedding '" + id + "' has dim " +
                                              std::to_string(v.size()) + ", header says " + std::to_string(store.dim_));
            store.add(id, std::move(v));
        });
        return store;
    }

    static EmbeddingStore load(const std::filesystem::path& p) { return parse_jsonl(read_file(p)); }

    std::string to_jsonl() const {
        std::string out = json{{"dim", dim_}}.dump() + "\n";
        for (const auto& id : order_) out += json{{"id", id}, {"vector", vectors_.at(id)}}.dump() + "\n";
        return out;
    }

private:
    std::size_t dim_ = 0;
    std::unordered_map<std::string, std::vector<double>> vectors_;
    std::vector<std::string> order_;
};

// --- model ---------------------------------------------------------------------

struct Shape {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t output_dim = 0;

    std::size_t param_count() const noexcept {
        return hidden_dim * input_dim + hidden_dim + output_dim * hidden_dim + output_dim;
    }
    friend bool operator==(const Shape&, const Shape&) = default;
};

// Flat parameter layout: W1 (hidden x input, row-major), b1, W2 (output x
// hidden), b2.
class ProjectionModel {
public:
    ProjectionModel() = default;

    ProjectionModel(Shape shape, std::vector<double> params) : shape_(shape), params_(std::move(params)) {
        if (shape_.input_dim == 0 || shape_.hidden_dim == 0 || shape_.output_dim == 0)
            fail_usage("bad_shape", "projection dims must all be at least 1");
        if (params_.size() != shape_.param_count())
            fail_data("bad_params", "expected " + std::to_string(shape_.param_count()) + " parameters, got " +
                                        std::to_string(params_.size()));
        for (double p : params_)
            if (!std::isfinite(p)) fail_data("non_finite_params", "model parameters must be finite");
    }

    // Weights ~ N(0, 1/fan_in); biases zero.
    static ProjectionModel initialize(Shape shape, std::uint64_t seed) {
        std::vector<double> p(shape.param_count(), 0.0);
        Rng rng(derive_seed(seed, "projection-init"));
        const double s1 = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(shape.input_dim, 1)));
        const double s2 = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(shape.hidden_dim, 1)));
        const auto w1 = shape.hidden_dim * shape.input_dim;
        const auto w2_off = w1 + shape.hidden_dim;
        for (std::size_t i = 0; i < w1; ++i) p[i] = rng.normal(0.0, s1);
        for (std::size_t i = 0; i < shape.output_dim * shape.hidden_dim; ++i) p[w2_off + i] = rng.normal(0.0, s2);
        return ProjectionModel(shape, std::move(p));
    }

    const Shape& shape() const noexcept { return shape_; }
    const std::vector<double>& params() const noexcept { return params_; }
    std::vector<double>& mutable_params() noexcept { return params_; }

    struct Activations {
        std::vector<double> hidden;  // tanh outputs
        std::vector<double> out;
    };

    Activations forward(std::span<const double> x) const {
        check_input(x);
        const auto [in, h, o] = shape_;
        Activations a{std::vector<double>(h), std::vector<double>(o)};
        const double* w1 = params_.data();
        const double* b1 = w1 + h * in;
        const double* w2 = b1 + h;
        const double* b2 = w2 + o * h;
        for (std::size_t r = 0; r < h; ++r) {
            double s = b1[r];
            for (std::size_t c = 0; c < in; ++c) s += w1[r * in + c] * x[c];
            a.hidden[r] = std::tanh(s);
        }
        for (std::size_t r = 0; r < o; ++r) {
            double s = b2[r];
            for (std::size_t c = 0; c < h; ++c) s += w2[r * h + c] * a.hidden[c];
            if (!std::isfinite(s)) fail_data("non_finite", "projection produced a non-finite value");
            a.out[r] = s;
        }
        return a;
    }

    std::vector<double> project(std::span<const double> x) const { return forward(x).out; }

    // Accumulates d(loss)/d(params) into grad given d(loss)/d(out).
    void backward(std::span<const double> x, const Activations& a, std::span<const double> grad_out,
                  std::span<double> grad) const {
        const auto [in, h, o] = shape_;
        const double* w2 = params_.data() + h * in + h;
        double* gw1 = grad.data();
        double* gb1 = gw1 + h * in;
        double* gw2 = gb1 + h;
        double* gb2 = gw2 + o * h;
        std::vector<double> gh(h, 0.0);
        for (std::size_t r = 0; r < o; ++r) {
            const double g = grad_out[r];
            if (g == 0.0) continue;
            gb2[r] += g;
            for (std::size_t c = 0; c < h; ++c) {
                gw2[r * h + c] += g * a.hidden[c];
                gh[c] += g * w2[r * h + c];
            }
        }
        for (std::size_t r = 0; r < h; ++r) {
            const double g = gh[r] * (1.0 - a.hidden[r] * a.hidden[r]);
            gb1[r] += g;
            for (std::size_t c = 0; c < in; ++c) gw1[r * in + c] += g * x[c];
        }
    }

private:
    void check_input(std::span<const double> x) const {
        if (x.size() != shape_.input_dim)
            fail_data("dim_mismatch", "input has dim " + std::to_string(x.size()) + ", model expects " +
                                          std::to_string(shape_.input_dim));
    }

    Shape shape_;
    std::vector<double> params_;
};

inline double euclidean(std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
    return std::sqrt(s);
}

// --- loss ----------------------------------------------------------------------

struct TrainConfig {
    double margin = 0.1;
    double lambda = 1.0;  // MSE weight
    double scale = 1.0;   // BWS difference -> distance units
    double learning_rate = 0.05;
    std::size_t epochs = 30;
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;
    std::size_t early_stop_patience = 5;
    std::size_t hidden_dim = 64;
    std::size_t output_dim = 64;

    void validate() const {
        if (!(margin > 0.0)) fail_usage("bad_config", "margin must be positive");
        if (!(lambda >= 0.0)) fail_usage("bad_config", "lambda must be nonnegative");
        if (!(scale > 0.0)) fail_usage("bad_config", "scale must be positive");
        if (!(learning_rate > 0.0)) fail_usage("bad_config", "learning_rate must be positive");
        if (batch_size == 0 || early_stop_patience == 0 || hidden_dim == 0 || output_dim == 0)
            fail_usage("bad_config", "batch_size, early_stop_patience, hidden_dim and output_dim must be positive");
    }
};

inline json config_to_json(const TrainConfig& c) {
    return json{{"margin", c.margin},         {"lambda", c.lambda},
                {"scale", c.scale},           {"learning_rate", c.learning_rate},
                {"epochs", c.epochs},         {"batch_size", c.batch_size},
                {"seed", c.seed},             {"early_stop_patience", c.early_stop_patience},
                {"hidden_dim", c.hidden_dim}, {"output_dim", c.output_dim}};
}

inline TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.margin = j.value("margin", c.margin);
    c.lambda = j.value("lambda", c.lambda);
    c.scale = j.value("scale", c.scale);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.output_dim = j.value("output_dim", c.output_dim);
    return c;
}

struct LossResult {
    double value = 0.0;
    double hinge = 0.0;
    double mse = 0.0;
    double d_plus = 0.0;
    double d_minus = 0.0;
    std::vector<double> grad;  // empty unless requested
};

// loss = max(0, d+ - d- + m) + lambda * ((d- - d+) - s * delta)^2.
// At d = 0 the distance gradient is taken as zero; at the hinge kink the
// hinge contributes nothing.
inline LossResult triplet_loss(const ProjectionModel& model, std::span<const double> a, std::span<const double> tp,
                               std::span<const double> tn, double delta_bws, const TrainConfig& cfg,
                               bool want_grad = true) {
    if (a.size() != tp.size() || a.size() != tn.size())
        fail_data("dim_mismatch", "abstract and title embeddings differ in dim");
    if (!(delta_bws > 0.0)) fail_data("non_positive_score_diff", "delta_bws must be positive");
    const auto fa = model.forward(a), fp = model.forward(tp), fn = model.forward(tn);
    LossResult r;
    r.d_plus = euclidean(fa.out, fp.out);
    r.d_minus = euclidean(fa.out, fn.out);
    const double gap = r.d_plus - r.d_minus + cfg.margin;
    r.hinge = std::max(0.0, gap);
    const double resid = (r.d_minus - r.d_plus) - cfg.scale * delta_bws;
    r.mse = resid * resid;
    r.value = r.hinge + cfg.lambda * r.mse;
    if (!std::isfinite(r.value)) fail_data("non_finite", "loss is not finite");
    if (!want_grad) return r;

    const double dh = gap > 0.0 ? 1.0 : 0.0;
    const double g_plus = dh - 2.0 * cfg.lambda * resid;    // dL/dd+
    const double g_minus = -dh + 2.0 * cfg.lambda * resid;  // dL/dd-
    const auto o = model.shape().output_dim;
    std::vector<double> ga(o, 0.0), gp(o, 0.0), gn(o, 0.0);
    for (std::size_t k = 0; k < o; ++k) {
        if (r.d_plus > 0.0) {
            const double u = (fa.out[k] - fp.out[k]) / r.d_plus;
            ga[k] += g_plus * u;
            gp[k] -= g_plus * u;
        }
        if (r.d_minus > 0.0) {
            const double u = (fa.out[k] - fn.out[k]) / r.d_minus;
            ga[k] += g_minus * u;
            gn[k] -= g_minus * u;
        }
    }
    r.grad.assign(model.shape().param_count(), 0.0);
    model.backward(a, fa, ga, r.grad);
    model.backward(tp, fp, gp, r.grad);
    model.backward(tn, fn, gn, r.grad);
    for (double g : r.grad)
        if (!std::isfinite(g)) fail_data("non_finite", "loss gradient is not finite");
    return r;
}

// --- trained metric ------------------------------------------------------------

struct EpochReport {
    std::size_t epoch = 0;  // 0 = initialization
    double train_loss = 0.0;
    std::optional<double> dev_tau;
    std::size_t margin_violations = 0;  // d+ - d- + m > 0
    std::size_t order_violations = 0;   // d+ >= d-
};

struct TrainReport {
    std::vector<EpochReport> epochs;
    std::size_t best_epoch = 0;
    bool stopped_early = false;
    bool diverged = false;
    std::string note;
};

struct TrainedMetric {
    ProjectionModel model;
    TrainConfig config;
    TrainReport report;

    // -||f(a) - f(t)||; higher is better, 0 is the maximum.
    double score(std::span<const double> abstract_emb, std::span<const double> title_emb) const {
        if (abstract_emb.size() != title_emb.size()) fail_data("dim_mismatch", "abstract and title dims differ");
        return -euclidean(model.project(abstract_emb), model.project(title_emb));
    }
};

// Metric scores for every (abstract, candidate) mentioned by the judgments.
inline stats::ScoreTable score_judgments(const TrainedMetric& m, const EmbeddingStore& store,
                                         const std::vector<RelativeRankingJudgment>& js) {
    stats::ScoreTable t;
    std::map<std::string, std::vector<double>> projected;
    auto proj = [&](const std::string& id) -> const std::vector<double>& {
        auto it = projected.find(id);
        if (it == projected.end()) it = projected.emplace(id, m.model.project(store.get(id))).first;
        return it->second;
    };
    for (const auto& j : js) {
        for (const auto* c : {&j.better_candidate_id, &j.worse_candidate_id}) {
            if (t.contains({j.abstract_id, *c})) continue;
            t[{j.abstract_id, *c}] = -euclidean(proj(j.abstract_id), proj(*c));
        }
    }
    return t;
}

inline double evaluate_tau(const TrainedMetric& m, const EmbeddingStore& store,
                           const std::vector<RelativeRankingJudgment>& js) {
    return stats::kendall_wmt_tau(js, score_judgments(m, store, js));
}

namespace detail {

struct Triplet {
    const std::vector<double>* a;
    const std::vector<double>* p;
    const std::vector<double>* n;
    double delta;
};

inline std::vector<Triplet> resolve(const std::vector<RelativeRankingJudgment>& js, const EmbeddingStore& store) {
    std::vector<Triplet> out;
    out.reserve(js.size());
    for (const auto& j : js) {
        if (!(j.score_diff > 0.0))
            fail_data("non_positive_score_diff", "judgment for '" + j.abstract_id + "' has score_diff <= 0");
        out.push_back({&store.get(j.abstract_id), &store.get(j.better_candidate_id), &store.get(j.worse_candidate_id),
                       j.score_diff});
    }
    return out;
}

inline void count_violations(const ProjectionModel& model, const std::vector<Triplet>& ts, const TrainConfig& cfg,
                             EpochReport& rep) {
    double total = 0.0;
    for (const auto& t : ts) {
        const auto r = triplet_loss(model, *t.a, *t.p, *t.n, t.delta, cfg, false);
        total += r.value;
        if (r.d_plus - r.d_minus + cfg.margin > 0.0) ++rep.margin_violations;
        if (r.d_plus >= r.d_minus) ++rep.order_violations;
    }
    rep.train_loss = ts.empty() ? 0.0 : total / static_cast<double>(ts.size());
}

} // namespace detail

// Plain minibatch SGD. The checkpoint with the best dev tau wins (earliest
// on ties; epoch 0 is the initialization). Without dev judgments the last
// epoch is kept. A non-finite loss aborts and returns the last good model.
inline TrainedMetric train(const std::vector<RelativeRankingJudgment>& train_js,
                           const std::vector<RelativeRankingJudgment>& dev_js, const EmbeddingStore& store,
                           const TrainConfig& cfg) {
    cfg.validate();
    if (store.dim() == 0) fail_data("empty_store", "embedding store is empty");
    const auto triplets = detail::resolve(train_js, store);
    detail::resolve(dev_js, store);
    const Shape shape{store.dim(), cfg.hidden_dim, cfg.output_dim};
    TrainedMetric current{ProjectionModel::initialize(shape, cfg.seed), cfg, {}};

    auto measure = [&](std::size_t epoch) {
        EpochReport rep;
        rep.epoch = epoch;
        detail::count_violations(current.model, triplets, cfg, rep);
        if (!dev_js.empty()) rep.dev_tau = evaluate_tau(current, store, dev_js);
        return rep;
    };

    TrainReport report;
    report.epochs.push_back(measure(0));
    ProjectionModel best = current.model;
    double best_tau = report.epochs[0].dev_tau.value_or(-2.0);
    std::size_t since_best = 0;

    std::vector<std::size_t> order(triplets.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(shape.param_count());
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng rng(derive_seed(derive_seed(cfg.seed, "epoch"), epoch));
        rng.shuffle(order);
        const ProjectionModel before = current.model;
        try {
            for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
                const auto end = std::min(order.size(), start + cfg.batch_size);
                std::fill(grad.begin(), grad.end(), 0.0);
                for (std::size_t k = start; k < end; ++k) {
                    const auto& t = triplets[order[k]];
                    const auto r = triplet_loss(current.model, *t.a, *t.p, *t.n, t.delta, cfg);
                    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += r.grad[i];
                }
                const double step = cfg.learning_rate / static_cast<double>(end - start);
                auto& p = current.model.mutable_params();
                for (std::size_t i = 0; i < p.size(); ++i) p[i] -= step * grad[i];
            }
            report.epochs.push_back(measure(epoch));
            if (!std::isfinite(report.epochs.back().train_loss)) fail_data("non_finite", "train loss is not finite");
        } catch (const Error& e) {
            if (e.reason() != "non_finite") throw;
            current.model = before;
            report.diverged = true;
            report.note = "diverged in epoch " + std::to_string(epoch) + "; kept last good checkpoint";
            if (dev_js.empty()) best = before;
            break;
        }
        if (dev_js.empty()) {
            best = current.model;
            report.best_epoch = epoch;
            continue;
        }
        const double tau = *report.epochs.back().dev_tau;
        if (tau > best_tau) {
            best_tau = tau;
            best = current.model;
            report.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.early_stop_patience) {
            report.stopped_early = true;
            break;
        }
    }
    return TrainedMetric{std::move(best), cfg, std::move(report)};
}

// --- serialization --------------------------------------------------------------

inline constexpr int kMetricFormatVersion = 1;

inline json report_to_json(const TrainReport& r) {
    json epochs = json::array();
    for (const auto& e : r.epochs) {
        json o{{"epoch", e.epoch},
               {"train_loss", e.train_loss},
               {"margin_violations", e.margin_violations},
               {"order_violations", e.order_violations}};
        o["dev_tau"] = e.dev_tau ? json(*e.dev_tau) : json(nullptr);
        epochs.push_back(o);
    }
    return json{{"epochs", epochs},
                {"best_epoch", r.best_epoch},
                {"stopped_early", r.stopped_early},
                {"diverged", r.diverged},
                {"note", r.note}};
}

inline TrainReport report_from_json(const json& j) {
    TrainReport r;
    for (const auto& e : j.at("epochs")) {
        EpochReport x;
        x.epoch = e.at("epoch").get<std::size_t>();
        x.train_loss = e.at("train_loss").get<double>();
        x.margin_violations = e.at("margin_violations").get<std::size_t>();
        x.order_violations = e.at("order_violations").get<std::size_t>();
        if (!e.at("dev_tau").is_null()) x.dev_tau = e.at("dev_tau").get<double>();
        r.epochs.push_back(x);
    }
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.stopped_early = j.at("stopped_early").get<bool>();
    r.diverged = j.at("diverged").get<bool>();
    r.note = j.at("note").get<std::string>();
    return r;
}

// Parameters are stored as hex of their IEEE-754 bits so reload is exact
// independent of any decimal formatting.
inline std::string double_bits_hex(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(bits));
    return buf;
}

inline double double_from_bits_hex(const std::string& s) {
    if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos)
        fail_data("bad_params", "parameter '" + s + "' is not 16 hex digits");
    const std::uint64_t bits = std::stoull(s, nullptr, 16);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

inline json metric_to_json(const TrainedMetric& m) {
    json params = json::array();
    for (double p : m.model.params()) params.push_back(double_bits_hex(p));
    const auto& s = m.model.shape();
    return json{{"format", "a2t-metric"},
                {"version", kMetricFormatVersion},
                {"shape", {{"input_dim", s.input_dim}, {"hidden_dim", s.hidden_dim}, {"output_dim", s.output_dim}}},
                {"activation", "tanh"},
                {"params", params},
                {"config", config_to_json(m.config)},
                {"report", report_to_json(m.report)}};
}

inline TrainedMetric metric_from_json(const json& j) {
    if (j.value("format", std::string()) != "a2t-metric")
        fail_data("metric_format", "not an a2t-metric document");
    const int v = j.value("version", -1);
    if (v != kMetricFormatVersion)
        fail_data("metric_version", "metric format version " + std::to_string(v) + " is not supported (expected " +
                                        std::to_string(kMetricFormatVersion) + ")");
    try {
        const auto& sj = j.at("shape");
        Shape s{sj.at("input_dim").get<std::size_t>(), sj.at("hidden_dim").get<std::size_t>(),
                sj.at("output_dim").get<std::size_t>()};
        std::vector<double> params;
        for (const auto& p : j.at("params")) params.push_back(double_from_bits_hex(p.get<std::string>()));
        return TrainedMetric{ProjectionModel(s, std::move(params)), config_from_json(j.at("config")),
                             report_from_json(j.at("report"))};
    } catch (const json::exception& e) {
        fail_data("corrupt_metric", std::string("metric document: ") + e.what());
    }
}

inline void save_metric(const TrainedMetric& m, const std::filesystem::path& p) {
    write_file(p, metric_to_json(m).dump(2) + "\n");
}

inline TrainedMetric load_metric(const std::filesystem::path& p) {
    try {
        return metric_from_json(json::parse(read_file(p)));
    } catch (const json::parse_error& e) {
        fail_data("corrupt_metric", p.string() + ": " + e.what());
    }
}

// --- train/dev/test splits ------------------------------------------------------

struct SplitSizes {
    std::size_t train = 170;
    std::size_t dev = 25;
    std::size_t test = 35;
    std::size_t total() const noexcept { return train + dev + test; }
};

struct MetricSplit {
    std::vector<std::string> train, dev, test;  // each sorted
};

// Sizes apply as given when the instance count equals their sum; otherwise
// dev and test scale proportionally (rounded) and train takes the rest.
inline std::vector<MetricSplit> make_metric_splits(std::vector<std::string> instance_ids, std::size_t n_splits,
                                                   SplitSizes sizes, std::uint64_t seed) {
    if (n_splits == 0) fail_infeasible("infeasible_split", "need at least one split");
    if (sizes.total() == 0) fail_infeasible("infeasible_split", "split sizes sum to zero");
    std::sort(instance_ids.begin(), instance_ids.end());
    if (std::adjacent_find(instance_ids.begin(), instance_ids.end()) != instance_ids.end())
        fail_data("duplicate_id", "instance ids must be unique");
    const auto n = instance_ids.size();
    SplitSizes s = sizes;
    if (n != sizes.total()) {
        const double f = static_cast<double>(n) / static_cast<double>(sizes.total());
        s.dev = static_cast<std::size_t>(std::llround(static_cast<double>(sizes.dev) * f));
        s.test = static_cast<std::size_t>(std::llround(static_cast<double>(sizes.test) * f));
        if (s.dev + s.test > n) fail_infeasible("infeasible_split", "too few instances for dev and test");
        s.train = n - s.dev - s.test;
    }
    if ((sizes.train > 0 && s.train == 0) || (sizes.dev > 0 && s.dev == 0) || (sizes.test > 0 && s.test == 0))
        fail_infeasible("infeasible_split", std::to_string(n) + " instances leave an empty train, dev or test part");
    std::vector<MetricSplit> out;
    for (std::size_t k = 0; k < n_splits; ++k) {
        auto ids = instance_ids;
        Rng rng(derive_seed(derive_seed(seed, "metric-split"), k));
        rng.shuffle(ids);
        MetricSplit m;
        m.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(s.train));
        m.dev.assign(ids.begin() + static_cast<std::ptrdiff_t>(s.train),
                     ids.begin() + static_cast<std::ptrdiff_t>(s.train + s.dev));
        m.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(s.train + s.dev), ids.end());
        std::sort(m.train.begin(), m.train.end());
        std::sort(m.dev.begin(), m.dev.end());
        std::sort(m.test.begin(), m.test.end());
        out.push_back(std::move(m));
    }
    return out;
}

inline std::vector<RelativeRankingJudgment> judgments_for(const std::vector<RelativeRankingJudgment>& js,
                                                          const std::vector<std::string>& abstract_ids) {
    std::vector<RelativeRankingJudgment> out;
    for (const auto& j : js)
        if (std::binary_search(abstract_ids.begin(), abstract_ids.end(), j.abstract_id)) out.push_back(j);
    return out;
}

} // namespace a2t::metric

#endif // A2T_A2TMETRIC_HPP
