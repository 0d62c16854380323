#ifndef A2T_STATS_HPP
#define A2T_STATS_HPP

// Correlation and aggregation primitives: Pearson, Spearman with
// average-rank ties, the WMT relative-ranking Kendall-like tau,
// system-level aggregation, and multi-split mean/std summaries.

#include <a2t/error.hpp>
#include <a2t/io.hpp>
#include <a2t/relative_ranking.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace a2t::stats {

// 1-based ranks; tied values share the mean of the positions they occupy.
inline std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        fail_data("length_mismatch", "pearson: inputs have different lengths");
    if (x.size() < 3) fail_data("too_few_points", "pearson: need at least 3 points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        fail_data("undefined_correlation", "correlation undefined: zero variance input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        fail_data("length_mismatch", "spearman: inputs have different lengths");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

// Keyed by (abstract id, candidate id).
using SegmentKey = std::pair<std::string, std::string>;
using ScoreTable = std::map<SegmentKey, double>;

struct WmtTau {
    double tau = 0.0;
    std::size_t concordant = 0;
    std::size_t discordant = 0;
};

// Concordant iff the metric scores the better title strictly higher; metric
// ties count as discordant.
inline WmtTau kendall_wmt_tau_detail(const std::vector<RelativeRankingJudgment>& judgments,
                                     const ScoreTable& metric_scores) {
    if (judgments.empty()) fail_data("no_judgments", "kendall_wmt_tau: zero judgments");
    auto lookup = [&](const std::string& abs, const std::string& cand) {
        const auto it = metric_scores.find({abs, cand});
        if (it == metric_scores.end())
            fail_data("missing_metric_score", "no metric score for candidate '" + cand + "' of '" + abs + "'");
        return it->second;
    };
    WmtTau r;
    for (const auto& j : judgments) {
        const double better = lookup(j.abstract_id, j.better_candidate_id);
        const double worse = lookup(j.abstract_id, j.worse_candidate_id);
        if (better > worse)
            ++r.concordant;
        else
            ++r.discordant;
    }
    r.tau = (static_cast<double>(r.concordant) - static_cast<double>(r.discordant)) /
            static_cast<double>(r.concordant + r.discordant);
    return r;
}

inline double kendall_wmt_tau(const std::vector<RelativeRankingJudgment>& judgments, const ScoreTable& metric_scores) {
    return kendall_wmt_tau_detail(judgments, metric_scores).tau;
}

struct SegmentScorePair {
    std::string abstract_id;
    std::string candidate_id;
    std::string system;
    double metric_score = 0.0;
    double human_score = 0.0;
};

struct SystemMeans {
    std::string system;
    double human_mean = 0.0;
    double metric_mean = 0.0;
    std::size_t n = 0;
};

struct SystemLevelReport {
    std::vector<SystemMeans> systems;  // sorted by system name
    std::optional<double> pearson;
    std::optional<double> spearman;
};

// Unweighted means per system; correlations need at least 3 systems.
inline SystemLevelReport system_level(const std::vector<SegmentScorePair>& pairs) {
    std::map<std::string, SystemMeans> acc;
    for (const auto& p : pairs) {
        if (!std::isfinite(p.metric_score) || !std::isfinite(p.human_score))
            fail_data("non_finite_score", "non-finite score for candidate '" + p.candidate_id + "'");
        auto& m = acc[p.system];
        m.system = p.system;
        m.human_mean += p.human_score;
        m.metric_mean += p.metric_score;
        ++m.n;
    }
    SystemLevelReport report;
    std::vector<double> human, metric;
    for (auto& [name, m] : acc) {
        m.human_mean /= static_cast<double>(m.n);
        m.metric_mean /= static_cast<double>(m.n);
        human.push_back(m.human_mean);
        metric.push_back(m.metric_mean);
        report.systems.push_back(m);
    }
    if (report.systems.size() >= 3) {
        report.pearson = stats::pearson(metric, human);
        report.spearman = stats::spearman(metric, human);
    }
    return report;
}

// Segment-level metric-score table from pairs (for kendall_wmt_tau).
inline ScoreTable metric_table(const std::vector<SegmentScorePair>& pairs) {
    ScoreTable t;
    for (const auto& p : pairs) t[{p.abstract_id, p.candidate_id}] = p.metric_score;
    return t;
}

struct SplitSummary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation (n - 1)
    std::size_t n = 0;
};

inline SplitSummary multi_split_summary(std::span<const double> values) {
    if (values.size() < 2) fail_usage("too_few_splits", "multi_split_summary needs at least 2 splits");
    SplitSummary s;
    s.n = values.size();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
    return s;
}

// "0.707±0.17" style cell.
inline std::string format_mean_std(const SplitSummary& s, int mean_decimals = 3, int std_decimals = 2) {
    return fixed(s.mean, mean_decimals) + "±" + fixed(s.std, std_decimals);
}

enum class Level { System, Segment };
enum class Coefficient { Pearson, Spearman, KendallWMT };

inline std::string_view to_string(Level l) { return l == Level::System ? "system" : "segment"; }

inline std::string_view to_string(Coefficient c) {
    switch (c) {
    case Coefficient::Pearson: return "pearson";
    case Coefficient::Spearman: return "spearman";
    case Coefficient::KendallWMT: return "kendall_wmt";
    }
    return "";
}

struct CorrelationReport {
    Level level = Level::Segment;
    Coefficient coefficient = Coefficient::Pearson;
    double value = 0.0;
    std::size_t n = 0;
    std::vector<double> split_values;
    std::optional<SplitSummary> summary;
};

inline CorrelationReport make_multi_split_report(Level level, Coefficient coef, std::vector<double> per_split,
                                                 std::size_t n) {
    CorrelationReport r;
    r.level = level;
    r.coefficient = coef;
    r.n = n;
    r.summary = multi_split_summary(per_split);
    r.value = r.summary->mean;
    r.split_values = std::move(per_split);
    return r;
}

} // namespace a2t::stats

#endif // A2T_STATS_HPP
