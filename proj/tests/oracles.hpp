#ifndef A2T_TESTS_ORACLES_HPP
#define A2T_TESTS_ORACLES_HPP

// Independent reference implementations used only by tests. Each one
// follows the textbook formula directly and shares no code with the
// library path it checks.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace a2t::oracle {

// Raw-moment form: (n*Sxy - Sx*Sy) / sqrt((n*Sxx - Sx^2) * (n*Syy - Sy^2)).
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    long double n = static_cast<long double>(x.size());
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        syy += static_cast<long double>(y[i]) * y[i];
        sxy += static_cast<long double>(x[i]) * y[i];
    }
    return static_cast<double>((n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy)));
}

// rank(v) = #{w < v} + (#{w == v} + 1) / 2, by direct counting.
inline std::vector<double> midranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0, equal = 0;
        for (double w : v) {
            if (w < v[i]) less += 1;
            if (w == v[i]) equal += 1;
        }
        r[i] = less + (equal + 1) / 2.0;
    }
    return r;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(midranks(x), midranks(y));
}

struct Judgment {
    std::string abstract_id, better, worse;
};

// Linear scan over (abstract, candidate, score) triples.
inline double kendall_wmt(const std::vector<Judgment>& js,
                          const std::vector<std::tuple<std::string, std::string, double>>& scores) {
    auto find = [&](const std::string& a, const std::string& c) {
        for (const auto& [sa, sc, v] : scores)
            if (sa == a && sc == c) return v;
        return std::nan("");
    };
    double conc = 0, disc = 0;
    for (const auto& j : js) {
        const double b = find(j.abstract_id, j.better), w = find(j.abstract_id, j.worse);
        if (b > w) conc += 1;
        else disc += 1;
    }
    return (conc - disc) / (conc + disc);
}

// Confusion-matrix form of Cohen's kappa.
inline double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b, int n_categories) {
    std::vector<std::vector<double>> m(n_categories, std::vector<double>(n_categories, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) m[a[i]][b[i]] += 1;
    const double n = static_cast<double>(a.size());
    double diag = 0, chance = 0;
    for (int i = 0; i < n_categories; ++i) {
        diag += m[i][i];
        double row = 0, col = 0;
        for (int j = 0; j < n_categories; ++j) {
            row += m[i][j];
            col += m[j][i];
        }
        chance += row * col;
    }
    const double po = diag / n, pe = chance / (n * n);
    return (po - pe) / (1 - pe);
}

// Brute-force BWS: for each (instance, candidate), scan every submitted
// selection in order, keep the last one per annotator, then count.
struct Selection {
    std::string instance, annotator;
    std::vector<std::string> best, worst;
};

inline std::map<std::pair<std::string, std::string>, double>
bws_recount(const std::vector<Selection>& log, const std::vector<std::pair<std::string, std::vector<std::string>>>& instances) {
    std::map<std::pair<std::string, std::string>, double> out;
    for (const auto& [inst, cands] : instances) {
        std::vector<std::string> annotators;
        for (const auto& s : log)
            if (s.instance == inst && std::find(annotators.begin(), annotators.end(), s.annotator) == annotators.end())
                annotators.push_back(s.annotator);
        if (annotators.empty()) continue;
        for (const auto& cand : cands) {
            double b = 0, w = 0;
            for (const auto& ann : annotators) {
                const Selection* last = nullptr;
                for (const auto& s : log)
                    if (s.instance == inst && s.annotator == ann) last = &s;
                for (const auto& x : last->best) b += x == cand;
                for (const auto& x : last->worst) w += x == cand;
            }
            out[{inst, cand}] = (b - w) / static_cast<double>(annotators.size());
        }
    }
    return out;
}

// Ensemble rules read straight off their definitions: one column of K
// classifier labels in, one label out.
inline int ens_mv_rule(std::vector<int> column) {
    std::sort(column.begin(), column.end());
    const auto k = column.size();
    const auto zeros = static_cast<std::size_t>(std::count(column.begin(), column.end(), 0));
    if (2 * zeros > k) return 0;  // strict majority
    const auto ones = std::count(column.begin(), column.end(), 1);
    const auto twos = std::count(column.begin(), column.end(), 2);
    return twos > ones ? 2 : 1;
}

inline int ens_sum_rule(const std::vector<int>& column, int i, int j) {
    int sum = 0;
    for (int l : column) sum += l;
    if (sum >= j) return 2;
    if (sum >= i) return 1;
    return 0;
}

// Precision/recall form of macro F1; an undefined precision or recall is 0.
inline double macro_f1(const std::vector<int>& pred, const std::vector<int>& gold, int n_classes) {
    double total = 0;
    for (int c = 0; c < n_classes; ++c) {
        double tp = 0, predicted = 0, actual = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            predicted += pred[i] == c;
            actual += gold[i] == c;
            tp += pred[i] == c && gold[i] == c;
        }
        const double p = predicted > 0 ? tp / predicted : 0.0;
        const double r = actual > 0 ? tp / actual : 0.0;
        total += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    }
    return total / n_classes;
}

} // namespace a2t::oracle

#endif // A2T_TESTS_ORACLES_HPP
