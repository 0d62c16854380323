// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Each check uses independent oracles from tests/oracles.hpp or
// planted structure with a known answer.

#include "gradient_check.hpp"
#include "oracles.hpp"
#include "planted_metric.hpp"
#include "service_harness.hpp"
#include "synthetic_campaign.hpp"
#include "synthetic_corpus.hpp"
#include "test_util.hpp"

#include <a2t/corpus.hpp>
#include <a2t/humor.hpp>
#include <a2t/pseudo.hpp>
#include <a2t/stats.hpp>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <fcntl.h>
#include <iostream>
#include <mutex>
#include <sys/wait.h>
#include <unistd.h>

using namespace a2t;
using namespace a2t::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int d = 3) { return fixed(v, d); }

// --- BWS ------------------------------------------------------------------------

Outcome bws_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t mismatches = 0, compared = 0;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        Rng rng(derive_seed(seed, "acceptance-bws"));
        const auto n_ann = 2 + rng.below(4);  // 2..5
        const auto per = 2 + rng.below(n_ann - 1);
        const auto c = synthetic_bws_campaign(3 + rng.below(10), n_ann, per, seed);
        const auto sels = random_selections(c, rng, 0.3);
        const auto r = scoring::bws_scores(c, state_of(c, sels));
        const auto expect = oracle::bws_recount(as_oracle_log(sels), oracle_instances(c));
        if (r.scores.size() != expect.size()) ++mismatches;
        for (const auto& s : r.scores) {
            ++compared;
            const auto it = expect.find({s.instance_id, s.candidate_id});
            if (it == expect.end() || it->second != s.score) ++mismatches;
        }
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < 10.0,
            std::to_string(compared) + " scores, " + std::to_string(mismatches) + " mismatches, " + fmt(secs, 2) + " s"};
}

Outcome bws_antisymmetry() {
    std::size_t bad = 0, n = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(derive_seed(seed, "acceptance-antisym"));
        const auto c = synthetic_bws_campaign(5 + rng.below(20), 2 + rng.below(4), 2, seed);
        auto sels = random_selections(c, rng, 0.2);
        const auto r = scoring::bws_scores(c, state_of(c, sels));
        for (auto& s : sels) std::swap(s.best, s.worst);
        const auto f = scoring::bws_scores(c, state_of(c, sels));
        if (f.scores.size() != r.scores.size()) {
            ++bad;
            continue;
        }
        for (std::size_t i = 0; i < r.scores.size(); ++i, ++n) bad += f.scores[i].score != -r.scores[i].score;
    }
    return {bad == 0, std::to_string(n) + " scores negated exactly over 100 campaigns"};
}

Outcome rr_conversion() {
    std::size_t bad = 0, total = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        Rng rng(derive_seed(seed, "acceptance-rr"));
        std::vector<scoring::BwsScore> scores;
        const auto n_inst = 1 + rng.below(8);
        for (std::size_t i = 0; i < n_inst; ++i) {
            const auto iid = "i" + std::to_string(i);
            const auto n_cand = 2 + rng.below(6);
            for (std::size_t k = 0; k < n_cand; ++k) {
                // coarse grid so ties are common
                const double v = (static_cast<double>(rng.below(9)) - 4.0) / 4.0;
                scores.push_back({iid, "a" + std::to_string(i), "c" + std::to_string(k), "S", 0, 0, 2, v});
            }
        }
        std::vector<std::tuple<std::string, std::string, std::string, double>> expect;
        for (std::size_t x = 0; x < scores.size(); ++x)
            for (std::size_t y = x + 1; y < scores.size(); ++y) {
                const auto &a = scores[x], &b = scores[y];
                if (a.instance_id != b.instance_id || a.score == b.score) continue;
                const auto& hi = a.score > b.score ? a : b;
                const auto& lo = a.score > b.score ? b : a;
                expect.emplace_back(hi.abstract_id, hi.candidate_id, lo.candidate_id, hi.score - lo.score);
            }
        const auto js = scoring::to_relative_ranking(scores);
        std::vector<std::tuple<std::string, std::string, std::string, double>> got;
        for (const auto& j : js) {
            bad += !(j.score_diff > 0.0);
            got.emplace_back(j.abstract_id, j.better_candidate_id, j.worse_candidate_id, j.score_diff);
        }
        std::sort(expect.begin(), expect.end());
        std::sort(got.begin(), got.end());
        bad += got != expect;
        total += js.size();
    }
    return {bad == 0, std::to_string(total) + " judgments over 200 score sets match pair enumeration"};
}

// --- metric ---------------------------------------------------------------------

Outcome gradient_check() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(20240611);
    double worst = 0.0;
    std::size_t active = 0;
    for (int i = 0; i < 100; ++i) {
        const auto p = gradient_probe(rng);
        worst = std::max(worst, p.relative_error);
        active += p.hinge_active;
    }
    const double secs = seconds_since(t0);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", worst);
    return {worst < 1e-4 && secs < 5.0, std::string("max relative error ") + buf + ", " + std::to_string(active) +
                                            "/100 with active hinge, " + fmt(secs, 2) + " s"};
}

Outcome planted_recovery() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto task = make_planted_task(seed);
        metric::TrainConfig cfg;
        cfg.seed = seed;
        const auto out = run_planted_pipeline(task, task.scores, cfg);
        const double p = out.system_pearson.value_or(-2.0);
        ok = ok && out.test_tau >= 0.9 && p >= 0.95;
        detail += "seed " + std::to_string(seed) + ": tau " + fmt(out.test_tau) + " pearson " + fmt(p) + "; ";
    }
    const double secs = seconds_since(t0);
    return {ok && secs < 60.0, detail + fmt(secs, 1) + " s"};
}

Outcome null_model() {
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto task = make_planted_task(seed);
        metric::TrainConfig cfg;
        cfg.seed = seed;
        sum += run_planted_pipeline(task, permuted_scores(task.scores, seed), cfg).test_tau;
    }
    const double mean = sum / 5.0;
    return {std::abs(mean) < 0.1, "mean tau " + fmt(mean) + " over 5 seeds"};
}

Outcome five_splits() {
    std::vector<std::string> ids;
    for (int i = 0; i < 230; ++i) ids.push_back("inst" + std::to_string(i));
    const auto a = metric::make_metric_splits(ids, 5, {}, 11);
    const auto b = metric::make_metric_splits(ids, 5, {}, 11);
    const auto other = metric::make_metric_splits(ids, 5, {}, 12);
    const std::set<std::string> all(ids.begin(), ids.end());
    bool ok = a.size() == 5;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const auto& s = a[k];
        ok = ok && s.train.size() == 170 && s.dev.size() == 25 && s.test.size() == 35;
        std::set<std::string> u;
        for (const auto* part : {&s.train, &s.dev, &s.test}) u.insert(part->begin(), part->end());
        ok = ok && u == all;  // sizes sum to 230, so equal union means disjoint
        ok = ok && s.train == b[k].train && s.dev == b[k].dev && s.test == b[k].test;
    }
    ok = ok && a[0].test != a[1].test && a[0].test != other[0].test;
    return {ok, "5 splits of 170/25/35, disjoint, reproducible per seed"};
}

// --- humor ----------------------------------------------------------------------

humor::LabelMatrix random_matrix(Rng& rng, std::size_t k, std::size_t n) {
    humor::LabelMatrix m;
    for (std::size_t r = 0; r < k; ++r) m.classifier_ids.push_back("c" + std::to_string(r));
    for (std::size_t c = 0; c < n; ++c) m.title_ids.push_back("t" + std::to_string(c));
    m.labels.assign(k, std::vector<int>(n));
    for (auto& row : m.labels)
        for (auto& v : row) v = static_cast<int>(rng.below(3));
    return m;
}

std::vector<int> column(const humor::LabelMatrix& m, std::size_t c) {
    std::vector<int> col;
    for (std::size_t r = 0; r < m.k(); ++r) col.push_back(m.labels[r][c]);
    return col;
}

Outcome ensembles() {
    Rng rng(4242);
    std::size_t bad = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto m = random_matrix(rng, 11, 50);
        const int i = static_cast<int>(rng.below(22));
        const int j = i + 1 + static_cast<int>(rng.below(static_cast<std::size_t>(22 - i)));
        const auto mv = humor::ens_mv(m);
        const auto sum = humor::ens_sum(m, i, j);
        for (std::size_t c = 0; c < 50; ++c) {
            const auto col = column(m, c);
            bad += mv[c] != oracle::ens_mv_rule(col);
            bad += sum[c] != oracle::ens_sum_rule(col, i, j);
        }
    }

    // Planted optimum: one title per possible sum 0..22, gold from (7, 16).
    humor::LabelMatrix planted;
    for (std::size_t r = 0; r < 11; ++r) planted.classifier_ids.push_back("c" + std::to_string(r));
    planted.labels.assign(11, {});
    std::vector<int> gold;
    for (int s = 0; s <= 22; ++s) {
        planted.title_ids.push_back("s" + std::to_string(s));
        for (int r = 0; r < 11; ++r) planted.labels[static_cast<std::size_t>(r)].push_back(r < s / 2 ? 2 : (r == s / 2 && s % 2 ? 1 : 0));
        gold.push_back(s < 7 ? 0 : (s < 16 ? 1 : 2));
    }
    const auto found = humor::search_thresholds(planted, gold);
    const bool planted_ok = found.i == 7 && found.j == 16 && found.score == 1.0;

    // Full-grid brute force at K = 5.
    std::size_t grid_bad = 0;
    for (int t = 0; t < 200; ++t) {
        const auto m = random_matrix(rng, 5, 30);
        std::vector<int> g(30);
        for (auto& v : g) v = static_cast<int>(rng.below(3));
        int bi = -1, bj = -1;
        double best = -1.0;
        for (int i = 0; i <= 10; ++i)
            for (int j = i + 1; j <= 10; ++j) {
                std::vector<int> pred;
                for (std::size_t c = 0; c < 30; ++c) pred.push_back(oracle::ens_sum_rule(column(m, c), i, j));
                const double f = oracle::macro_f1(pred, g, 3);
                if (f > best + 1e-12) {
                    best = f;
                    bi = i;
                    bj = j;
                }
            }
        const auto r = humor::search_thresholds(m, g);
        grid_bad += r.i != bi || r.j != bj || std::abs(r.score - best) > 1e-12;
    }
    return {bad == 0 && planted_ok && grid_bad == 0,
            std::to_string(bad) + " rule mismatches in 1000 matrices; planted (" + std::to_string(found.i) + "," +
                std::to_string(found.j) + ") F1 " + fmt(found.score) + "; " + std::to_string(grid_bad) +
                "/200 K=5 grid disagreements"};
}

// --- corpus ---------------------------------------------------------------------

Outcome split_constraints() {
    const auto rs = make_synthetic_corpus(table8_shape(), 8);
    corpus::SplitSpec spec;
    spec.seed = 8;
    const auto split = corpus::make_constrained_split(rs, spec);
    bool ok = split.dev.size() == 600 && split.test.size() == 600;
    std::string detail;
    for (const auto* part : {&split.dev, &split.test}) {
        std::size_t funny = 0, nlp = 0, human = 0;
        for (const auto& r : *part) {
            funny += corpus::to_binary(*r.humor_label) == 1;
            nlp += r.source == corpus::Source::NLP;
            human += r.humor_label_origin == corpus::LabelOrigin::Human;
        }
        ok = ok && funny == 200 && part->size() - funny == 400 && nlp == 480 && part->size() - nlp == 120 && human == 0;
        detail += std::to_string(part->size() - funny) + "/" + std::to_string(funny) + " label, " + std::to_string(nlp) + "/" +
                  std::to_string(part->size() - nlp) + " source; ";
    }
    std::size_t human_total = 0, human_train = 0;
    for (const auto& r : rs) human_total += r.humor_label_origin == corpus::LabelOrigin::Human;
    for (const auto& r : split.train) human_train += r.humor_label_origin == corpus::LabelOrigin::Human;
    ok = ok && human_total == human_train && split.train.size() + 1200 == rs.size();
    return {ok, std::to_string(rs.size()) + " records; " + detail + std::to_string(human_train) + "/" +
                    std::to_string(human_total) + " human-labeled in train"};
}

// --- pseudo ---------------------------------------------------------------------

Outcome pseudo_pipeline() {
    std::vector<pseudo::OriginalTitle> originals;
    std::vector<pseudo::GeneratedTitle> gens;
    const std::vector<std::string> planted{"Don't invite the reviewers", "Attention is all you need twice",
                                           "Don't invite attention"};
    Rng rng(99);
    for (int i = 0; i < 300; ++i) {
        const auto id = "a" + std::to_string(i);
        const int label = i % 3 == 0 ? 1 : 0;
        originals.push_back({id, "abstract " + id, "original " + id, label});
        const int flip = 1 - label;
        std::string text = flip ? "Quip" + std::to_string(i) + " zany" + std::to_string(i) : "Plain" + std::to_string(i) + " study";
        if (flip && rng.below(3) == 0) text = planted[rng.below(planted.size())] + " " + std::to_string(i);
        gens.push_back({id, flip, text, flip});
        // a label-inconsistent extra that must never survive
        gens.push_back({id, flip, "rejected " + id, label});
    }
    const pseudo::NgramFilterConfig cfg;
    const auto consistent = pseudo::keep_label_consistent(gens);
    const auto filtered = pseudo::ngram_frequency_filter(consistent, cfg);
    const auto leftover = pseudo::recheck(filtered.kept, cfg);
    const auto merged = pseudo::merge_pseudo(originals, filtered.kept);

    std::map<std::string, std::vector<const pseudo::TrainingInstance*>> by;
    for (const auto& x : merged.instances) by[x.abstract_id].push_back(&x);
    bool grouped = !by.empty();
    for (const auto& [id, xs] : by)
        grouped = grouped && xs.size() == 2 && xs[0]->label != xs[1]->label && xs[0]->provenance != xs[1]->provenance;
    const bool ok = leftover.empty() && !filtered.removed.empty() && grouped && merged.pseudo_share() == 0.5;
    return {ok, std::to_string(filtered.removed.size()) + " planted-bigram titles removed, recheck clean; " +
                    std::to_string(by.size()) + " abstracts x 2 titles, pseudo share " + percent(merged.pseudo_share(), 0)};
}

// --- statistics -----------------------------------------------------------------

Outcome statistics() {
    Rng rng(31337);
    std::size_t bad = 0, trials = 0;
    for (int t = 0; t < 100; ++t) {
        const auto n = 4 + rng.below(40);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = t % 3 == 0 ? static_cast<double>(rng.below(5)) : rng.normal();
            y[i] = t % 3 == 0 ? static_cast<double>(rng.below(5)) : rng.normal();
        }
        const double op = oracle::pearson(x, y), os = oracle::spearman(x, y);
        if (!std::isfinite(op) || !std::isfinite(os)) continue;  // constant draw
        ++trials;
        bad += std::abs(stats::pearson(x, y) - op) > 1e-12;
        bad += std::abs(stats::spearman(x, y) - os) > 1e-12;

        std::vector<RelativeRankingJudgment> js;
        std::vector<oracle::Judgment> ojs;
        stats::ScoreTable table;
        std::vector<std::tuple<std::string, std::string, double>> flat;
        for (int c = 0; c < 6; ++c) {
            const double s = static_cast<double>(rng.below(8));
            table[{"a", "c" + std::to_string(c)}] = s;
            flat.emplace_back("a", "c" + std::to_string(c), s);
        }
        for (int k = 0; k < 20; ++k) {
            const auto b = rng.below(6);
            auto w = rng.below(5);
            if (w >= b) ++w;
            js.push_back({"a", "c" + std::to_string(b), "c" + std::to_string(w), 1.0});
            ojs.push_back({"a", "c" + std::to_string(b), "c" + std::to_string(w)});
        }
        bad += std::abs(stats::kendall_wmt_tau(js, table) - oracle::kendall_wmt(ojs, flat)) > 1e-12;

        std::vector<int> ka(n), kb(n);
        for (std::size_t i = 0; i < n; ++i) {
            ka[i] = static_cast<int>(rng.below(3));
            kb[i] = rng.uniform() < 0.6 ? ka[i] : static_cast<int>(rng.below(3));
        }
        const std::vector<int> cats{0, 1, 2};
        bad += std::abs(annotation::cohen_kappa(ka, kb, cats) - oracle::cohen_kappa(ka, kb, 3)) > 1e-12;
    }
    const std::vector<int> fa{0, 0, 1, 1}, fb{0, 1, 0, 1}, cats{0, 1};
    const double k = annotation::cohen_kappa(fa, fb, cats);
    return {bad == 0 && trials >= 90 && k == 0.0,
            std::to_string(trials) + " random inputs, " + std::to_string(bad) + " deviations over 1e-12; kappa fixture " +
                fmt(k, 1)};
}

// --- report fixtures ------------------------------------------------------------

std::string render_published() {
    const auto t = parse_csv(read_file(fixture("system_bws_published.csv")));
    std::vector<scoring::BwsScore> scores;
    for (const auto& r : t.rows)
        scores.push_back({"fixture", "fixture", r[t.column("system")], r[t.column("system")], 0, 0, 1,
                          parse_double(r[t.column("bws")], "bws")});
    auto out = scoring::system_table(scoring::system_means(scores)).render_text();
    const std::vector<double> splits{0.43, 0.66, 0.76, 0.82, 0.865};
    TextTable corr({"metric", "system-level Spearman"});
    corr.add_row({"A2TMetric", stats::format_mean_std(stats::multi_split_summary(splits))});
    return out + corr.render_text();
}

Outcome report_fixtures() {
    const auto a = render_published(), b = render_published();
    const auto bart = a.find("BART_xsum"), human = a.find("HUMAN");
    const bool ok = a == b && bart != std::string::npos && human != std::string::npos && bart < human &&
                    a.find("0.197") != std::string::npos && a.find("0.181") != std::string::npos &&
                    a.find("0.707±0.17") != std::string::npos;
    return {ok, "BART_xsum 0.197 above HUMAN 0.181, \"0.707±0.17\", byte-stable"};
}

// --- durability -----------------------------------------------------------------

struct Server {
    pid_t pid = -1;
    int port = -1;
};

Server start_server(const fs::path& config, const fs::path& log) {
    Server s;
    s.pid = ::fork();
    if (s.pid == 0) {
        const int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        ::dup2(fd, 1);
        ::dup2(fd, 2);
        ::execl(A2T_CLI_PATH, "a2t", "serve", "--config", config.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    for (int i = 0; i < 500 && s.port < 0; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        if (!fs::exists(log)) continue;
        const auto text = read_file(log);
        const auto at = text.find("listening on ");
        const auto nl = text.find('\n', at);
        if (at != std::string::npos && nl != std::string::npos) {
            const auto line = text.substr(at, nl - at);
            s.port = std::stoi(line.substr(line.rfind(':') + 1));
        }
    }
    return s;
}

struct Ack {
    std::string instance, annotator;
    std::set<std::string> best, worst;
};

// Two scripted annotators post until the server goes away; only 200s count.
void annotate(int port, const std::map<std::string, std::string>& keys, std::vector<Ack>& acks, std::mutex& mu,
              std::atomic<bool>& stop, std::uint64_t seed) {
    httplib::Client cli("127.0.0.1", port);
    cli.set_connection_timeout(1);
    cli.set_read_timeout(2);
    Rng rng(seed);
    std::map<std::string, std::string> tokens;
    for (const auto& [ann, key] : keys) tokens[ann] = login(cli, ann, key, "synthetic");
    std::size_t n = 0;
    while (!stop) {
        bool any = false;
        for (const auto& [ann, tok] : tokens) {
            if (tok.empty() || stop) continue;
            const auto next = call(cli, "GET", "/campaigns/synthetic/next?annotator=" + ann, nullptr, tok);
            if (next.status != 200) return;
            if (next.body["done"]) continue;
            any = true;
            std::vector<std::string> ids;
            for (const auto& c : next.body["task"]["candidates"]) ids.push_back(c.at("id"));
            rng.shuffle(ids);
            const std::string iid = next.body["task"]["instance_id"];
            const json body{{"judgment",
                             {{"kind", "best_worst"}, {"instance_id", iid}, {"best", {ids[0], ids[1]}}, {"worst", {ids[2], ids[3]}}}},
                            {"idempotency_key", "s" + std::to_string(seed) + "-" + std::to_string(n++)}};
            const auto r = call(cli, "POST", "/campaigns/synthetic/judgments", &body, tok);
            if (r.status != 200) return;
            std::lock_guard lock(mu);
            acks.push_back({iid, ann, {ids[0], ids[1]}, {ids[2], ids[3]}});
        }
        if (!any) return;
    }
}

Outcome durability() {
    TempDir dir;
    const auto c = synthetic_bws_campaign(60, 2, 2, 17);
    const auto keys = provision(dir / "data", c);
    write_file(dir / "serve.json", json{{"host", "127.0.0.1"},
                                        {"port", 0},
                                        {"data_dir", (dir / "data").string()},
                                        {"admin_token", "acceptance-admin"},
                                        {"snapshot_every", 7}}
                                       .dump());
    std::vector<Ack> acks;
    std::mutex mu;
    std::size_t kills = 0;
    for (int round = 0; round < 3; ++round) {
        const auto s = start_server(dir / "serve.json", dir / ("serve" + std::to_string(round) + ".log"));
        if (s.port < 0) {
            if (s.pid > 0) ::kill(s.pid, SIGKILL), ::waitpid(s.pid, nullptr, 0);
            return {false, "server did not start in round " + std::to_string(round)};
        }
        std::atomic<bool> stop{false};
        const std::size_t target = (round + 1) * 25;
        std::thread worker(annotate, s.port, std::cref(keys), std::ref(acks), std::ref(mu), std::ref(stop),
                           static_cast<std::uint64_t>(round));
        // Kill while the worker is mid-stream.
        for (int i = 0; i < 1000; ++i) {
            {
                std::lock_guard lock(mu);
                if (acks.size() >= target) break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
        ::kill(s.pid, SIGKILL);
        ::waitpid(s.pid, nullptr, 0);
        ++kills;
        stop = true;
        worker.join();
    }

    // Final restart: every acknowledged judgment (latest per key) must be there.
    const auto s = start_server(dir / "serve.json", dir / "serve-final.log");
    if (s.port < 0) return {false, "server did not restart"};
    httplib::Client cli("127.0.0.1", s.port);
    const auto exported = call(cli, "GET", "/campaigns/synthetic/export?view=analysis", nullptr, "acceptance-admin");
    ::kill(s.pid, SIGTERM);
    int status = 0;
    ::waitpid(s.pid, &status, 0);
    if (exported.status != 200) return {false, "export failed with HTTP " + std::to_string(exported.status)};
    const auto state = annotation::state_from_export(c, exported.body.get<std::string>());

    std::map<std::pair<std::string, std::string>, const Ack*> latest;
    for (const auto& a : acks) latest[{a.instance, a.annotator}] = &a;
    std::size_t lost = 0;
    for (const auto& [key, a] : latest) {
        const auto it = state.find(annotation::JudgmentKey{key.first, key.second, {}});
        const auto* sel = it == state.end() ? nullptr : std::get_if<annotation::BwsSelection>(&it->second);
        if (!sel || sel->best != a->best || sel->worst != a->worst) ++lost;
    }
    // At most one unacknowledged in-flight write per kill may also have landed.
    const bool extra_ok = state.size() >= latest.size() && state.size() <= latest.size() + kills;
    const bool clean_exit = WIFEXITED(status) && WEXITSTATUS(status) == 0;
    return {lost == 0 && extra_ok && clean_exit && !latest.empty(),
            std::to_string(acks.size()) + " acknowledged over " + std::to_string(kills) + " SIGKILLs, " + std::to_string(lost) +
                " lost, " + std::to_string(state.size()) + " replayed; graceful stop " + (clean_exit ? "ok" : "failed")};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, Outcome (*)()>> checks{
        {"bws-oracle-equivalence", bws_oracle},
        {"bws-antisymmetry", bws_antisymmetry},
        {"rr-conversion", rr_conversion},
        {"gradient-check", gradient_check},
        {"planted-metric-recovery", planted_recovery},
        {"null-model", null_model},
        {"five-split-protocol", five_splits},
        {"ensemble-oracles", ensembles},
        {"split-constraints", split_constraints},
        {"pseudo-pipeline", pseudo_pipeline},
        {"statistics-oracles", statistics},
        {"report-fixtures", report_fixtures},
        {"durability", durability},
    };
    int failed = 0;
    for (const auto& [name, fn] : checks) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (checks.size() - static_cast<std::size_t>(failed)) << "/" << checks.size() << " acceptance criteria passed"
              << std::endl;
    return failed ? 1 : 0;
}
