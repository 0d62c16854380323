#ifndef A2T_HUMOR_HPP
#define A2T_HUMOR_HPP

// Humor labels: annotation merging, balanced classifier splits, the EnsMV
// and EnsSUM ensembles with threshold search, macro F1, and the
// generation-control metrics. Labels are 0 (not funny), 1 (medium funny)
// and 2 (funny).

#include <a2t/error.hpp>
#include <a2t/io.hpp>
#include <a2t/random.hpp>
#include <a2t/report.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace a2t::humor {

inline void check_label(int l, std::string_view where = "label") {
    if (l < 0 || l > 2) fail_data("bad_label", std::string(where) + " " + std::to_string(l) + " is outside {0,1,2}");
}

inline int merge_annotations(int a, int b) {
    check_label(a);
    check_label(b);
    return std::max(a, b);
}

inline int collapse(int l) { return l == 0 ? 0 : 1; }

// --- balanced splits ------------------------------------------------------------

struct LabeledTitle {
    std::string id;
    int label = 0;
};

struct BalancedSplitSpec {
    std::size_t n_splits = 11;
    std::size_t train_funny = 100;      // funny or medium funny
    std::size_t train_not_funny = 200;
    std::optional<std::size_t> dev_funny;      // default: every funny title left over
    std::optional<std::size_t> dev_not_funny;  // default: same as dev_funny
    std::uint64_t seed = 0;

    static BalancedSplitSpec stage1(std::uint64_t seed = 0) { return {11, 100, 200, std::nullopt, std::nullopt, seed}; }
    static BalancedSplitSpec stage2(std::uint64_t seed = 0) { return {11, 400, 800, std::nullopt, std::nullopt, seed}; }
};

struct BalancedSplit {
    std::vector<std::string> train;  // sorted
    std::vector<std::string> dev;    // sorted
};

// Split k draws from its own stream derive_seed(seed, k). Dev takes the
// held-out funny titles plus an equal number of held-out not-funny ones
// unless counts are given.
inline std::vector<BalancedSplit> make_balanced_splits(const std::vector<LabeledTitle>& pool, const BalancedSplitSpec& spec) {
    std::vector<std::string> funny, plain;
    std::set<std::string> seen;
    for (const auto& t : pool) {
        check_label(t.label, "label of '" + t.id + "'");
        if (!seen.insert(t.id).second) fail_data("duplicate_id", "title '" + t.id + "' appears twice in the pool");
        (t.label == 0 ? plain : funny).push_back(t.id);
    }
    std::sort(funny.begin(), funny.end());
    std::sort(plain.begin(), plain.end());
    if (spec.n_splits == 0) fail_usage("bad_spec", "n_splits must be positive");
    const auto dev_f = spec.dev_funny.value_or(funny.size() >= spec.train_funny ? funny.size() - spec.train_funny : 0);
    const auto dev_n = spec.dev_not_funny.value_or(dev_f);
    auto need = [](const char* what, std::size_t want, std::size_t have) {
        if (want > have)
            fail_infeasible("infeasible_split", std::string(what) + " needs " + std::to_string(want) + ", pool has " +
                                                    std::to_string(have) + " (short by " + std::to_string(want - have) + ")");
    };
    need("funny/medium (train + dev)", spec.train_funny + dev_f, funny.size());
    need("not-funny (train + dev)", spec.train_not_funny + dev_n, plain.size());
    std::vector<BalancedSplit> out;
    for (std::size_t k = 0; k < spec.n_splits; ++k) {
        Rng rng(derive_seed(derive_seed(spec.seed, "balanced-split"), k));
        auto f = funny, p = plain;
        rng.shuffle(f);
        rng.shuffle(p);
        BalancedSplit s;
        s.train.insert(s.train.end(), f.begin(), f.begin() + static_cast<std::ptrdiff_t>(spec.train_funny));
        s.train.insert(s.train.end(), p.begin(), p.begin() + static_cast<std::ptrdiff_t>(spec.train_not_funny));
        s.dev.insert(s.dev.end(), f.begin() + static_cast<std::ptrdiff_t>(spec.train_funny),
                     f.begin() + static_cast<std::ptrdiff_t>(spec.train_funny + dev_f));
        s.dev.insert(s.dev.end(), p.begin() + static_cast<std::ptrdiff_t>(spec.train_not_funny),
                     p.begin() + static_cast<std::ptrdiff_t>(spec.train_not_funny + dev_n));
        std::sort(s.train.begin(), s.train.end());
        std::sort(s.dev.begin(), s.dev.end());
        out.push_back(std::move(s));
    }
    return out;
}

// --- label matrix -----------------------------------------------------------------

struct LabelMatrix {
    std::vector<std::string> classifier_ids;   // K rows
    std::vector<std::string> title_ids;        // N columns
    std::vector<std::vector<int>> labels;      // labels[k][n]

    std::size_t k() const noexcept { return classifier_ids.size(); }
    std::size_t n() const noexcept { return title_ids.size(); }

    void validate() const {
        if (labels.size() != classifier_ids.size()) fail_data("ragged_matrix", "row count differs from classifier count");
        for (std::size_t r = 0; r < labels.size(); ++r) {
            if (labels[r].size() != title_ids.size())
                fail_data("ragged_matrix", "classifier '" + classifier_ids[r] + "' has " + std::to_string(labels[r].size()) +
                                               " labels for " + std::to_string(title_ids.size()) + " titles");
            for (int l : labels[r]) check_label(l, "label of classifier '" + classifier_ids[r] + "'");
        }
    }
};

// Header: classifier_id, then one column per title id.
inline LabelMatrix parse_label_matrix_csv(std::string_view text) {
    const auto t = parse_csv(text);
    if (t.header.empty()) fail_data("empty_matrix", "label matrix CSV is empty");
    LabelMatrix m;
    m.title_ids.assign(t.header.begin() + 1, t.header.end());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row.size() != t.header.size())
            fail_data("ragged_matrix", "label matrix line " + std::to_string(t.line_numbers[r]) + " has " +
                                           std::to_string(row.size()) + " fields, header has " + std::to_string(t.header.size()));
        m.classifier_ids.push_back(row[0]);
        std::vector<int> ls;
        for (std::size_t c = 1; c < row.size(); ++c)
            ls.push_back(static_cast<int>(parse_int(row[c], "label at line " + std::to_string(t.line_numbers[r]))));
        m.labels.push_back(std::move(ls));
    }
    m.validate();
    return m;
}

inline std::string label_matrix_to_csv(const LabelMatrix& m) {
    std::ostringstream out;
    CsvWriter w(out);
    std::vector<std::string> header{"classifier_id"};
    header.insert(header.end(), m.title_ids.begin(), m.title_ids.end());
    w.row(header);
    for (std::size_t r = 0; r < m.k(); ++r) {
        std::vector<std::string> row{m.classifier_ids[r]};
        for (int l : m.labels[r]) row.push_back(std::to_string(l));
        w.row(row);
    }
    return out.str();
}

// Two columns: title_id,label.
inline std::map<std::string, int> parse_gold_csv(std::string_view text) {
    const auto t = parse_csv(text);
    std::map<std::string, int> out;
    if (t.header.empty()) return out;
    const auto ci = t.column("title_id"), cl = t.column("label");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const int l = static_cast<int>(parse_int(t.rows[r][cl], "label at line " + std::to_string(t.line_numbers[r])));
        check_label(l);
        if (!out.emplace(t.rows[r][ci], l).second) fail_data("duplicate_id", "gold repeats title '" + t.rows[r][ci] + "'");
    }
    return out;
}

inline std::vector<int> align_gold(const LabelMatrix& m, const std::map<std::string, int>& gold) {
    std::vector<int> out;
    for (const auto& id : m.title_ids) {
        const auto it = gold.find(id);
        if (it == gold.end()) fail_data("missing_gold", "no gold label for title '" + id + "'");
        out.push_back(it->second);
    }
    return out;
}

// --- ensembles --------------------------------------------------------------------

// 0 when a strict majority (K/2 + 1) of classifiers say 0; otherwise 2 if
// more classifiers say 2 than 1, else 1.
inline std::vector<int> ens_mv(const LabelMatrix& m, std::vector<std::string>* warnings = nullptr) {
    m.validate();
    if (warnings && m.k() % 2 == 0)
        warnings->push_back("EnsMV with an even number of classifiers (" + std::to_string(m.k()) + ")");
    const std::size_t majority = m.k() / 2 + 1;
    std::vector<int> out(m.n());
    for (std::size_t c = 0; c < m.n(); ++c) {
        std::array<std::size_t, 3> count{0, 0, 0};
        for (std::size_t r = 0; r < m.k(); ++r) ++count[static_cast<std::size_t>(m.labels[r][c])];
        if (count[0] >= majority)
            out[c] = 0;
        else
            out[c] = count[2] > count[1] ? 2 : 1;
    }
    return out;
}

inline std::vector<int> label_sums(const LabelMatrix& m) {
    std::vector<int> s(m.n(), 0);
    for (const auto& row : m.labels)
        for (std::size_t c = 0; c < row.size(); ++c) s[c] += row[c];
    return s;
}

inline int sum_to_label(int sum, int i, int j) { return sum < i ? 0 : (sum < j ? 1 : 2); }

inline void check_thresholds(const LabelMatrix& m, int i, int j) {
    const int top = 2 * static_cast<int>(m.k());
    if (!(0 <= i && i < j && j <= top))
        fail_usage("bad_thresholds", "EnsSUM needs 0 <= i < j <= " + std::to_string(top) + ", got i=" + std::to_string(i) +
                                         " j=" + std::to_string(j));
}

inline std::vector<int> ens_sum(const LabelMatrix& m, int i, int j) {
    m.validate();
    check_thresholds(m, i, j);
    std::vector<int> out;
    for (int s : label_sums(m)) out.push_back(sum_to_label(s, i, j));
    return out;
}

// --- metrics -------------------------------------------------------------------------

enum class F1Mode { ThreeWay, Binary };

// Unweighted mean of per-class F1. A class absent from both prediction and
// gold scores 0 and still counts toward the mean.
inline double macro_f1(const std::vector<int>& pred, const std::vector<int>& gold, F1Mode mode = F1Mode::ThreeWay) {
    if (pred.size() != gold.size()) fail_data("length_mismatch", "macro_f1: prediction and gold differ in length");
    if (pred.empty()) fail_data("empty_input", "macro_f1: no labels");
    const std::size_t n_classes = mode == F1Mode::Binary ? 2 : 3;
    std::vector<double> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        check_label(pred[i]);
        check_label(gold[i]);
        const auto p = static_cast<std::size_t>(mode == F1Mode::Binary ? collapse(pred[i]) : pred[i]);
        const auto g = static_cast<std::size_t>(mode == F1Mode::Binary ? collapse(gold[i]) : gold[i]);
        if (p == g) {
            ++tp[p];
        } else {
            ++fp[p];
            ++fn[g];
        }
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        const double denom = 2 * tp[c] + fp[c] + fn[c];
        sum += denom == 0 ? 0.0 : 2 * tp[c] / denom;
    }
    return sum / static_cast<double>(n_classes);
}

struct ThresholdResult {
    int i = 0;
    int j = 1;
    double score = 0.0;
    bool degenerate = false;
    std::string warning;
};

// Exhaustive over 0 <= i < j <= 2K; ties go to the smaller i, then j.
inline ThresholdResult search_thresholds(const LabelMatrix& m, const std::vector<int>& gold,
                                         F1Mode mode = F1Mode::ThreeWay) {
    m.validate();
    if (gold.size() != m.n()) fail_data("length_mismatch", "gold labels do not align with matrix titles");
    const auto sums = label_sums(m);
    const int top = 2 * static_cast<int>(m.k());
    ThresholdResult best;
    best.score = -1.0;
    double worst = 2.0;
    std::vector<int> pred(sums.size());
    for (int i = 0; i <= top; ++i) {
        for (int j = i + 1; j <= top; ++j) {
            for (std::size_t c = 0; c < sums.size(); ++c) pred[c] = sum_to_label(sums[c], i, j);
            const double f = macro_f1(pred, gold, mode);
            worst = std::min(worst, f);
            if (f > best.score) {
                best.i = i;
                best.j = j;
                best.score = f;
            }
        }
    }
    std::set<int> classes;
    for (int g : gold) classes.insert(mode == F1Mode::Binary ? collapse(g) : g);
    if (classes.size() < 2) {
        best.degenerate = true;
        best.warning = "gold labels contain a single class; the optimum is not informative";
    } else if (worst == best.score) {
        best.degenerate = true;
        best.warning = "objective is flat over the threshold grid";
    }
    return best;
}

// --- generation control ------------------------------------------------------------

struct Generation {
    std::string abstract_id;
    int constraint = 0;      // 0 = not funny, 1 = funny
    std::string title;
    int assigned_label = 0;  // binary label from the humor classifier
};

struct ControlMetrics {
    double f1_macro = 0.0;
    double acc_funny = 0.0;
    double acc_not_funny = 0.0;
    double ratio_same = 0.0;
    std::size_t n_funny = 0;
    std::size_t n_not_funny = 0;
    std::size_t abstracts_compared = 0;
    std::vector<std::string> missing_variant;  // abstracts left out of Ratio_SAME
};

inline ControlMetrics generation_control_metrics(const std::vector<Generation>& gens) {
    if (gens.empty()) fail_data("empty_input", "no generations");
    ControlMetrics m;
    std::vector<int> pred, gold;
    std::size_t ok_f = 0, ok_n = 0;
    std::map<std::string, std::array<std::optional<std::string>, 2>> variants;
    for (const auto& g : gens) {
        if (g.constraint != 0 && g.constraint != 1) fail_data("bad_label", "constraint must be 0 or 1");
        if (g.assigned_label != 0 && g.assigned_label != 1) fail_data("bad_label", "assigned label must be binary");
        pred.push_back(g.assigned_label);
        gold.push_back(g.constraint);
        if (g.constraint == 1) {
            ++m.n_funny;
            ok_f += g.assigned_label == 1;
        } else {
            ++m.n_not_funny;
            ok_n += g.assigned_label == 0;
        }
        auto& slot = variants[g.abstract_id][static_cast<std::size_t>(g.constraint)];
        if (slot) fail_data("duplicate_generation", "abstract '" + g.abstract_id + "' has two titles for one constraint");
        slot = normalize_whitespace(g.title);
    }
    m.f1_macro = macro_f1(pred, gold, F1Mode::Binary);
    m.acc_funny = m.n_funny ? static_cast<double>(ok_f) / static_cast<double>(m.n_funny) : 0.0;
    m.acc_not_funny = m.n_not_funny ? static_cast<double>(ok_n) / static_cast<double>(m.n_not_funny) : 0.0;
    std::size_t same = 0;
    for (const auto& [id, v] : variants) {
        if (!v[0] || !v[1]) {
            m.missing_variant.push_back(id);
            continue;
        }
        ++m.abstracts_compared;
        same += *v[0] == *v[1];
    }
    m.ratio_same = m.abstracts_compared ? static_cast<double>(same) / static_cast<double>(m.abstracts_compared) : 0.0;
    return m;
}

inline std::string control_report(const ControlMetrics& m, const std::string& system = "system") {
    TextTable t({"", "F1_macro", "ACC_notFUNNY", "ACC_FUNNY", "Ratio_SAME"});
    t.add_row({system, fixed(m.f1_macro, 3), percent(m.acc_not_funny), percent(m.acc_funny), percent(m.ratio_same)});
    auto out = t.render_text();
    if (!m.missing_variant.empty())
        out += std::to_string(m.missing_variant.size()) + " abstract(s) without both variants left out of Ratio_SAME\n";
    return out;
}

// CSV: abstract_id,constraint,title,assigned_label.
inline std::vector<Generation> parse_generations_csv(std::string_view text) {
    const auto t = parse_csv(text);
    std::vector<Generation> out;
    if (t.header.empty()) return out;
    const auto ca = t.column("abstract_id"), cc = t.column("constraint"), ct = t.column("title"),
               cl = t.column("assigned_label");
    for (const auto& row : t.rows)
        out.push_back({row[ca], static_cast<int>(parse_int(row[cc], "constraint")), row[ct],
                       static_cast<int>(parse_int(row[cl], "assigned_label"))});
    return out;
}

// --- baseline classifier -------------------------------------------------------------

// L2-regularized softmax regression over title embeddings, full-batch
// gradient descent. Only here so the ensemble pipeline can run without
// external models.
struct BaselineConfig {
    double l2 = 1e-3;
    double learning_rate = 0.5;
    std::size_t epochs = 200;
};

struct BaselineClassifier {
    std::size_t dim = 0;
    std::vector<double> weights;  // 3 x (dim + 1), bias last

    std::array<double, 3> logits(std::span<const double> x) const {
        std::array<double, 3> z{};
        for (std::size_t c = 0; c < 3; ++c) {
            const double* w = weights.data() + c * (dim + 1);
            double s = w[dim];
            for (std::size_t d = 0; d < dim; ++d) s += w[d] * x[d];
            z[c] = s;
        }
        return z;
    }

    int predict(std::span<const double> x) const {
        if (x.size() != dim) fail_data("dim_mismatch", "classifier input dim mismatch");
        const auto z = logits(x);
        return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    }
};

inline BaselineClassifier train_baseline(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                                         const BaselineConfig& cfg = {}) {
    if (xs.empty() || xs.size() != ys.size()) fail_data("bad_training_set", "baseline needs aligned, non-empty data");
    BaselineClassifier m;
    m.dim = xs.front().size();
    m.weights.assign(3 * (m.dim + 1), 0.0);
    std::vector<double> grad(m.weights.size());
    const double n = static_cast<double>(xs.size());
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i].size() != m.dim) fail_data("dim_mismatch", "training vectors differ in dim");
            check_label(ys[i]);
            auto z = m.logits(xs[i]);
            const double mx = *std::max_element(z.begin(), z.end());
            double norm = 0.0;
            for (auto& v : z) norm += (v = std::exp(v - mx));
            for (std::size_t c = 0; c < 3; ++c) {
                const double g = z[c] / norm - (static_cast<int>(c) == ys[i] ? 1.0 : 0.0);
                double* gw = grad.data() + c * (m.dim + 1);
                for (std::size_t d = 0; d < m.dim; ++d) gw[d] += g * xs[i][d];
                gw[m.dim] += g;
            }
        }
        for (std::size_t k = 0; k < m.weights.size(); ++k) {
            const bool bias = (k % (m.dim + 1)) == m.dim;
            m.weights[k] -= cfg.learning_rate * (grad[k] / n + (bias ? 0.0 : cfg.l2 * m.weights[k]));
        }
    }
    return m;
}

} // namespace a2t::humor

#endif // A2T_HUMOR_HPP
