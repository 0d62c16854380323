#ifndef A2T_SCORING_HPP
#define A2T_SCORING_HPP

// Judgments -> BWS scores, relative-ranking tuples, average-rank tables and
// best/worst pick distributions.

#include <a2t/annotation.hpp>
#include <a2t/io.hpp>
#include <a2t/relative_ranking.hpp>
#include <a2t/report.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace a2t::scoring {

struct BwsScore {
    std::string instance_id;
    std::string abstract_id;
    std::string candidate_id;
    std::string system_tag;
    std::size_t n_best = 0;
    std::size_t n_worst = 0;
    std::size_t n_annotators = 0;
    double score = 0.0;
};

struct ExcludedInstance {
    std::string instance_id;
    std::size_t n_annotators = 0;
};

struct BwsResult {
    std::vector<BwsScore> scores;  // campaign instance order, then candidate order
    std::vector<ExcludedInstance> excluded;
};

// BWS = (n_best - n_worst) / n_annotators, with n_annotators the number of
// annotators who judged that instance. Instances judged by fewer than the
// campaign minimum are left out and listed in `excluded`.
inline BwsResult bws_scores(const annotation::Campaign& c, const annotation::EffectiveState& state) {
    if (c.kind != annotation::TaskKind::BestWorst)
        fail_usage("kind_mismatch", "bws_scores needs a best-worst campaign");
    std::map<std::string, std::vector<const annotation::BwsSelection*>> by_instance;
    for (const auto& [k, j] : state)
        if (const auto* s = std::get_if<annotation::BwsSelection>(&j)) by_instance[s->instance_id].push_back(s);
    BwsResult r;
    for (const auto& inst : c.instances) {
        const auto it = by_instance.find(inst.id);
        const std::size_t n = it == by_instance.end() ? 0 : it->second.size();
        if (n == 0 || n < c.min_annotators_per_instance) {
            r.excluded.push_back({inst.id, n});
            continue;
        }
        for (const auto& cand : inst.candidates) {
            BwsScore s{inst.id, inst.abstract_id, cand.id, cand.system_tag, 0, 0, n, 0.0};
            for (const auto* sel : it->second) {
                s.n_best += sel->best.count(cand.id);
                s.n_worst += sel->worst.count(cand.id);
            }
            s.score = (static_cast<double>(s.n_best) - static_cast<double>(s.n_worst)) / static_cast<double>(n);
            r.scores.push_back(std::move(s));
        }
    }
    return r;
}

struct SystemScore {
    std::string system;
    double mean = 0.0;
    std::size_t n = 0;
};

// Unweighted mean BWS per system, best first (ties by name).
inline std::vector<SystemScore> system_means(const std::vector<BwsScore>& scores) {
    std::map<std::string, SystemScore> acc;
    for (const auto& s : scores) {
        auto& m = acc[s.system_tag];
        m.system = s.system_tag;
        m.mean += s.score;
        ++m.n;
    }
    std::vector<SystemScore> out;
    for (auto& [name, m] : acc) {
        m.mean /= static_cast<double>(m.n);
        out.push_back(m);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.mean > b.mean; });
    return out;
}

inline TextTable system_table(const std::vector<SystemScore>& systems, int decimals = 3) {
    TextTable t({"system", "BWS", "n"});
    for (const auto& s : systems) t.add_row({s.system, fixed(s.mean, decimals), std::to_string(s.n)});
    return t;
}

// Every unordered candidate pair of an instance with unequal BWS becomes
// one better -> worse judgment; ties produce nothing.
inline std::vector<RelativeRankingJudgment> to_relative_ranking(const std::vector<BwsScore>& scores) {
    std::vector<RelativeRankingJudgment> out;
    std::size_t i = 0;
    while (i < scores.size()) {
        std::size_t j = i;
        while (j < scores.size() && scores[j].instance_id == scores[i].instance_id) ++j;
        for (std::size_t a = i; a < j; ++a) {
            for (std::size_t b = a + 1; b < j; ++b) {
                const auto& x = scores[a];
                const auto& y = scores[b];
                if (x.score == y.score) continue;
                const auto& better = x.score > y.score ? x : y;
                const auto& worse = x.score > y.score ? y : x;
                out.push_back({x.abstract_id, better.candidate_id, worse.candidate_id, better.score - worse.score});
            }
        }
        i = j;
    }
    return out;
}

// --- CSV ---------------------------------------------------------------------

inline std::string scores_to_csv(const std::vector<BwsScore>& scores) {
    std::ostringstream out;
    CsvWriter w(out);
    w.row({"instance_id", "candidate_id", "system_tag", "n_best", "n_worst", "n_annotators", "bws", "abstract_id"});
    for (const auto& s : scores)
        w.row({s.instance_id, s.candidate_id, s.system_tag, std::to_string(s.n_best), std::to_string(s.n_worst),
               std::to_string(s.n_annotators), exact(s.score), s.abstract_id});
    return out.str();
}

// Rows of one instance must be contiguous (as written by scores_to_csv).
inline std::vector<BwsScore> scores_from_csv(std::string_view text) {
    const auto t = parse_csv(text);
    std::vector<BwsScore> out;
    if (t.header.empty()) return out;
    const auto ci = t.column("instance_id"), cc = t.column("candidate_id"), cs = t.column("system_tag"),
               cb = t.column("n_best"), cw = t.column("n_worst"), cn = t.column("n_annotators"), cv = t.column("bws");
    const bool has_abs = t.has_column("abstract_id");
    std::set<std::string> closed;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const auto where = " (line " + std::to_string(t.line_numbers[r]) + ")";
        BwsScore s;
        s.instance_id = row[ci];
        s.candidate_id = row[cc];
        s.system_tag = row[cs];
        s.abstract_id = has_abs && !row[t.column("abstract_id")].empty() ? row[t.column("abstract_id")] : s.instance_id;
        s.n_best = static_cast<std::size_t>(parse_int(row[cb], "n_best" + where));
        s.n_worst = static_cast<std::size_t>(parse_int(row[cw], "n_worst" + where));
        s.n_annotators = static_cast<std::size_t>(parse_int(row[cn], "n_annotators" + where));
        s.score = parse_double(row[cv], "bws" + where);
        if (s.score < -1.0 || s.score > 1.0) fail_data("bws_out_of_range", "bws outside [-1, 1]" + where);
        if (!out.empty() && out.back().instance_id != s.instance_id) {
            closed.insert(out.back().instance_id);
            if (closed.contains(s.instance_id))
                fail_data("instance_not_contiguous", "rows of instance '" + s.instance_id + "' are split" + where);
        }
        out.push_back(std::move(s));
    }
    return out;
}

// Human-score lookup keyed by (abstract id, candidate id).
inline stats::ScoreTable score_table(const std::vector<BwsScore>& scores) {
    stats::ScoreTable t;
    for (const auto& s : scores) t[{s.abstract_id, s.candidate_id}] = s.score;
    return t;
}

// --- average rank --------------------------------------------------------------

struct AverageRankCell {
    std::string group;
    std::string system;
    std::string criterion;
    double mean_rank = 0.0;
    std::size_t n = 0;
};

struct AverageRankTable {
    std::vector<AverageRankCell> cells;   // sorted by (group, system, criterion)
    std::vector<std::string> omitted;     // systems present in the campaign but never ranked
};

using GroupFn = std::function<std::string(const annotation::TaskInstance&)>;

inline AverageRankTable average_rank(const annotation::Campaign& c, const annotation::EffectiveState& state,
                                     const GroupFn& group_of = {}) {
    if (c.kind != annotation::TaskKind::Ranking) fail_usage("kind_mismatch", "average_rank needs a ranking campaign");
    std::map<std::tuple<std::string, std::string, std::string>, std::pair<double, std::size_t>> acc;
    std::set<std::string> all_systems, ranked_systems;
    for (const auto& inst : c.instances)
        for (const auto& cand : inst.candidates) all_systems.insert(cand.system_tag);
    for (const auto& [k, j] : state) {
        const auto* r = std::get_if<annotation::RankAnnotation>(&j);
        if (!r) continue;
        const auto* inst = c.find_instance(r->instance_id);
        if (!inst) continue;
        const auto group = group_of ? group_of(*inst) : std::string("all");
        for (const auto& cand : inst->candidates) {
            const auto it = r->rank_of.find(cand.id);
            if (it == r->rank_of.end()) continue;
            auto& cell = acc[{group, cand.system_tag, r->criterion}];
            cell.first += it->second;
            ++cell.second;
            ranked_systems.insert(cand.system_tag);
        }
    }
    AverageRankTable t;
    for (const auto& [key, v] : acc)
        t.cells.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), v.first / static_cast<double>(v.second),
                           v.second});
    for (const auto& s : all_systems)
        if (!ranked_systems.contains(s)) t.omitted.push_back(s);
    return t;
}

inline std::string average_rank_to_csv(const AverageRankTable& t) {
    std::ostringstream out;
    CsvWriter w(out);
    w.row({"group", "system", "criterion", "mean_rank", "n"});
    for (const auto& c : t.cells) w.row({c.group, c.system, c.criterion, exact(c.mean_rank), std::to_string(c.n)});
    return out.str();
}

inline AverageRankTable average_rank_from_csv(std::string_view text) {
    const auto t = parse_csv(text);
    AverageRankTable out;
    if (t.header.empty()) return out;
    const auto cg = t.column("group"), cs = t.column("system"), cc = t.column("criterion"), cm = t.column("mean_rank");
    const bool has_n = t.has_column("n");
    for (const auto& row : t.rows)
        out.cells.push_back({row[cg], row[cs], row[cc], parse_double(row[cm], "mean_rank"),
                             has_n ? static_cast<std::size_t>(parse_int(row[t.column("n")], "n")) : 0});
    return out;
}

// One row per system, one column per (group, criterion). Systems in the
// given order (first-seen order when empty); missing cells print "-".
inline TextTable render_average_rank(const AverageRankTable& t, const std::vector<std::string>& groups,
                                     const std::vector<std::string>& criteria, std::vector<std::string> systems = {},
                                     int decimals = 2) {
    if (systems.empty())
        for (const auto& c : t.cells)
            if (std::find(systems.begin(), systems.end(), c.system) == systems.end()) systems.push_back(c.system);
    std::vector<std::string> header{"system"};
    for (const auto& g : groups)
        for (const auto& cr : criteria) header.push_back(g + " " + cr);
    TextTable table(header);
    for (const auto& s : systems) {
        std::vector<std::string> row{s};
        for (const auto& g : groups)
            for (const auto& cr : criteria) {
                std::string cell = "-";
                for (const auto& c : t.cells)
                    if (c.group == g && c.system == s && c.criterion == cr) cell = fixed(c.mean_rank, decimals);
                row.push_back(cell);
            }
        table.add_row(row);
    }
    return table;
}

// --- best / worst distribution ----------------------------------------------------

struct SystemPicks {
    std::string system;
    std::size_t best = 0;
    std::size_t worst = 0;
    double best_share = 0.0;
    double worst_share = 0.0;
};

struct PickDistribution {
    std::vector<SystemPicks> systems;  // by best share, descending; ties by name
    std::size_t total_best = 0;
    std::size_t total_worst = 0;
};

inline PickDistribution best_worst_distribution(std::vector<SystemPicks> counts) {
    PickDistribution d;
    for (const auto& s : counts) {
        d.total_best += s.best;
        d.total_worst += s.worst;
    }
    if (d.total_best == 0 || d.total_worst == 0) fail_data("no_judgments", "no best/worst picks to distribute");
    for (auto& s : counts) {
        s.best_share = static_cast<double>(s.best) / static_cast<double>(d.total_best);
        s.worst_share = static_cast<double>(s.worst) / static_cast<double>(d.total_worst);
    }
    std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
        return a.best != b.best ? a.best > b.best : a.system < b.system;
    });
    d.systems = std::move(counts);
    return d;
}

inline PickDistribution best_worst_distribution(const annotation::Campaign& c, const annotation::EffectiveState& state) {
    std::map<std::string, SystemPicks> acc;
    for (const auto& inst : c.instances)
        for (const auto& cand : inst.candidates) acc[cand.system_tag].system = cand.system_tag;
    for (const auto& [k, j] : state) {
        const auto* s = std::get_if<annotation::BwsSelection>(&j);
        if (!s) continue;
        const auto* inst = c.find_instance(s->instance_id);
        if (!inst) continue;
        for (const auto& id : s->best)
            if (const auto* cand = inst->find_candidate(id)) ++acc[cand->system_tag].best;
        for (const auto& id : s->worst)
            if (const auto* cand = inst->find_candidate(id)) ++acc[cand->system_tag].worst;
    }
    std::vector<SystemPicks> counts;
    for (auto& [name, p] : acc) counts.push_back(p);
    return best_worst_distribution(std::move(counts));
}

inline TextTable distribution_table(const PickDistribution& d) {
    TextTable t({"system", "best", "best %", "worst", "worst %"});
    for (const auto& s : d.systems)
        t.add_row({s.system, std::to_string(s.best), percent(s.best_share), std::to_string(s.worst),
                   percent(s.worst_share)});
    return t;
}

inline std::vector<SystemPicks> pick_counts_from_csv(std::string_view text) {
    const auto t = parse_csv(text);
    std::vector<SystemPicks> out;
    if (t.header.empty()) return out;
    const auto cs = t.column("system"), cb = t.column("best"), cw = t.column("worst");
    for (const auto& row : t.rows)
        out.push_back({row[cs], static_cast<std::size_t>(parse_int(row[cb], "best")),
                       static_cast<std::size_t>(parse_int(row[cw], "worst")), 0.0, 0.0});
    return out;
}

} // namespace a2t::scoring

#endif // A2T_SCORING_HPP
