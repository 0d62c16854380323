#ifndef A2T_PSEUDO_HPP
#define A2T_PSEUDO_HPP

// Pseudo training data for humor-constrained generation. Generated titles
// come in from an external generator; we keep the ones the humor classifier
// agrees with, drop funny titles carrying over-frequent n-grams (generator
// artefacts), and pair survivors with the original title of the same
// abstract.

#include <a2t/corpus.hpp>
#include <a2t/error.hpp>
#include <a2t/io.hpp>
#include <a2t/report.hpp>

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace a2t::pseudo {

using corpus::PaperRecord;
using corpus::tokenize;

struct GeneratedTitle {
    std::string abstract_id;
    int constraint = 0;                 // requested binary humor: 0 not funny, 1 funny
    std::string text;
    std::optional<int> assigned_label;  // binary, from the humor classifier

    friend bool operator==(const GeneratedTitle&, const GeneratedTitle&) = default;
};

inline void check_binary(int v, std::string_view what, std::size_t line = 0) {
    if (v != 0 && v != 1)
        fail_data("bad_label", (line ? "line " + std::to_string(line) + ": " : std::string()) + std::string(what) +
                                   " must be 0 or 1");
}

// --- IO ---------------------------------------------------------------------------

// One object per line: {abstract_id, constraint, text[, assigned_label]}.
inline std::vector<GeneratedTitle> parse_generated_jsonl(std::string_view text) {
    std::vector<GeneratedTitle> out;
    std::set<std::pair<std::string, int>> seen;
    for_each_jsonl(text, [&](const json& obj, std::size_t line) {
        GeneratedTitle g;
        g.abstract_id = field_as<std::string>(obj, "abstract_id", line);
        g.constraint = field_as<int>(obj, "constraint", line);
        g.text = field_as<std::string>(obj, "text", line);
        check_binary(g.constraint, "constraint", line);
        if (const auto it = obj.find("assigned_label"); it != obj.end() && !it->is_null()) {
            g.assigned_label = field_as<int>(obj, "assigned_label", line);
            check_binary(*g.assigned_label, "assigned_label", line);
        }
        if (!seen.emplace(g.abstract_id, g.constraint).second)
            fail_data("duplicate_generation", "line " + std::to_string(line) + ": second title for abstract '" +
                                                  g.abstract_id + "' under constraint " + std::to_string(g.constraint));
        out.push_back(std::move(g));
    });
    return out;
}

inline std::string generated_to_jsonl(const std::vector<GeneratedTitle>& gens) {
    std::vector<json> rows;
    for (const auto& g : gens) {
        json o{{"abstract_id", g.abstract_id}, {"constraint", g.constraint}, {"text", g.text}};
        o["assigned_label"] = g.assigned_label ? json(*g.assigned_label) : json(nullptr);
        rows.push_back(std::move(o));
    }
    return to_jsonl(rows);
}

// Classifier output as CSV abstract_id,constraint,assigned_label, joined on
// (abstract_id, constraint). Every generation must get a label.
inline void join_labels(std::vector<GeneratedTitle>& gens, std::string_view labels_csv) {
    const auto t = parse_csv(labels_csv);
    std::map<std::pair<std::string, int>, int> labels;
    if (!t.header.empty()) {
        const auto ca = t.column("abstract_id"), cc = t.column("constraint"), cl = t.column("assigned_label");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto line = t.line_numbers[r];
            const int c = static_cast<int>(parse_int(t.rows[r][cc], "constraint"));
            const int l = static_cast<int>(parse_int(t.rows[r][cl], "assigned_label"));
            check_binary(c, "constraint", line);
            check_binary(l, "assigned_label", line);
            labels[{t.rows[r][ca], c}] = l;
        }
    }
    for (auto& g : gens) {
        const auto it = labels.find({g.abstract_id, g.constraint});
        if (it == labels.end())
            fail_data("missing_label", "no classifier label for abstract '" + g.abstract_id + "' constraint " +
                                           std::to_string(g.constraint));
        g.assigned_label = it->second;
    }
}

// --- label consistency --------------------------------------------------------------

inline std::vector<GeneratedTitle> keep_label_consistent(const std::vector<GeneratedTitle>& gens) {
    std::vector<GeneratedTitle> out;
    for (const auto& g : gens) {
        if (!g.assigned_label)
            fail_data("missing_label", "generation for abstract '" + g.abstract_id + "' has no assigned label");
        if (*g.assigned_label == g.constraint) out.push_back(g);
    }
    return out;
}

// --- n-gram filter ---------------------------------------------------------------------

enum class NgramScope { FunnyPseudoOnly, AllPseudo };

inline std::string_view to_string(NgramScope s) { return s == NgramScope::AllPseudo ? "all_pseudo" : "funny_pseudo_only"; }

struct NgramFilterConfig {
    std::set<std::size_t> n_values{2, 3};
    std::size_t max_corpus_frequency = 10;  // size_t max disables the filter
    NgramScope scope = NgramScope::FunnyPseudoOnly;

    void validate() const {
        if (n_values.empty()) fail_usage("bad_ngram_config", "n_values is empty");
        if (*n_values.begin() < 1) fail_usage("bad_ngram_config", "n must be at least 1");
        if (max_corpus_frequency < 1) fail_usage("bad_ngram_config", "threshold must be at least 1");
    }
};

inline json ngram_config_to_json(const NgramFilterConfig& c) {
    json j;
    j["n_values"] = c.n_values;
    j["max_corpus_frequency"] = c.max_corpus_frequency == std::numeric_limits<std::size_t>::max()
                                    ? json("inf")
                                    : json(c.max_corpus_frequency);
    j["scope"] = to_string(c.scope);
    return j;
}

// n-grams over corpus tokens, joined with single spaces.
inline std::vector<std::string> ngrams(const std::vector<std::string>& tokens, std::size_t n) {
    std::vector<std::string> out;
    if (n == 0 || tokens.size() < n) return out;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string g = tokens[i];
        for (std::size_t k = 1; k < n; ++k) g += ' ' + tokens[i + k];
        out.push_back(std::move(g));
    }
    return out;
}

// Occurrence counts (not document counts) of every configured n-gram.
inline std::map<std::string, std::size_t> ngram_counts(const std::vector<GeneratedTitle>& gens,
                                                       const NgramFilterConfig& cfg) {
    std::map<std::string, std::size_t> counts;
    for (const auto& g : gens) {
        if (cfg.scope == NgramScope::FunnyPseudoOnly && g.constraint != 1) continue;
        const auto toks = tokenize(g.text);
        for (auto n : cfg.n_values)
            for (auto& gram : ngrams(toks, n)) ++counts[gram];
    }
    return counts;
}

struct Removal {
    GeneratedTitle title;
    std::vector<std::pair<std::string, std::size_t>> offending;  // n-gram, corpus count
};

struct FilterResult {
    std::vector<GeneratedTitle> kept;
    std::vector<Removal> removed;
};

// Two passes: count over the scope, then drop funny titles holding any
// n-gram counted more than the threshold. Not-funny titles pass through.
inline FilterResult ngram_frequency_filter(const std::vector<GeneratedTitle>& gens, const NgramFilterConfig& cfg) {
    cfg.validate();
    const auto counts = ngram_counts(gens, cfg);
    FilterResult out;
    for (const auto& g : gens) {
        if (g.constraint != 1) {
            out.kept.push_back(g);
            continue;
        }
        Removal r{g, {}};
        const auto toks = tokenize(g.text);
        std::set<std::string> seen;
        for (auto n : cfg.n_values)
            for (auto& gram : ngrams(toks, n)) {
                const auto c = counts.at(gram);
                if (c > cfg.max_corpus_frequency && seen.insert(gram).second) r.offending.emplace_back(gram, c);
            }
        if (r.offending.empty())
            out.kept.push_back(g);
        else
            out.removed.push_back(std::move(r));
    }
    return out;
}

// Soundness recheck: the over-threshold n-grams still present among kept
// funny titles, counted on the kept set. Empty when the filter is sound.
inline std::vector<std::string> recheck(const std::vector<GeneratedTitle>& kept, const NgramFilterConfig& cfg) {
    const auto counts = ngram_counts(kept, cfg);
    std::set<std::string> bad;
    for (const auto& g : kept) {
        if (g.constraint != 1) continue;
        const auto toks = tokenize(g.text);
        for (auto n : cfg.n_values)
            for (auto& gram : ngrams(toks, n))
                if (counts.at(gram) > cfg.max_corpus_frequency) bad.insert(gram);
    }
    return {bad.begin(), bad.end()};
}

inline std::string removal_report_csv(const std::vector<Removal>& removed) {
    std::ostringstream out;
    CsvWriter w(out);
    w.row({"abstract_id", "text", "ngram", "corpus_count"});
    for (const auto& r : removed)
        for (const auto& [gram, c] : r.offending) w.row({r.title.abstract_id, r.title.text, gram, std::to_string(c)});
    return out.str();
}

// --- merge -------------------------------------------------------------------------------

struct OriginalTitle {
    std::string abstract_id;
    std::string abstract;
    std::string title;
    int label = 0;  // binary
};

inline std::vector<OriginalTitle> originals_from_corpus(const std::vector<PaperRecord>& records) {
    std::vector<OriginalTitle> out;
    for (const auto& r : records) {
        if (!r.humor_label) fail_data("missing_label", "record '" + r.id + "' has no humor label");
        out.push_back({r.id, r.abstract, r.title, to_binary(*r.humor_label)});
    }
    return out;
}

enum class Provenance { Original, Pseudo };

inline std::string_view to_string(Provenance p) { return p == Provenance::Pseudo ? "pseudo" : "original"; }

struct TrainingInstance {
    std::string abstract_id;
    std::string abstract;
    std::string title;
    int label = 0;
    Provenance provenance = Provenance::Original;

    friend bool operator==(const TrainingInstance&, const TrainingInstance&) = default;
};

struct Rejection {
    GeneratedTitle title;
    std::string reason;  // same_label_as_original | no_original | duplicate_pseudo | not_label_consistent
};

struct MergeResult {
    std::vector<TrainingInstance> instances;  // original then pseudo, abstracts in original order
    std::vector<Rejection> rejected;
    std::size_t abstracts_without_pseudo = 0;

    std::size_t pseudo_count() const {
        std::size_t n = 0;
        for (const auto& i : instances) n += i.provenance == Provenance::Pseudo;
        return n;
    }
    double pseudo_share() const {
        return instances.empty() ? 0.0 : static_cast<double>(pseudo_count()) / static_cast<double>(instances.size());
    }
};

inline MergeResult merge_pseudo(const std::vector<OriginalTitle>& originals, const std::vector<GeneratedTitle>& pseudo) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < originals.size(); ++i) {
        check_binary(originals[i].label, "original label");
        if (!index.emplace(originals[i].abstract_id, i).second)
            fail_data("duplicate_id", "abstract '" + originals[i].abstract_id + "' has two original titles");
    }
    MergeResult out;
    std::vector<const GeneratedTitle*> partner(originals.size(), nullptr);
    for (const auto& g : pseudo) {
        check_binary(g.constraint, "constraint");
        const auto it = index.find(g.abstract_id);
        if (it == index.end()) {
            out.rejected.push_back({g, "no_original"});
        } else if (g.assigned_label && *g.assigned_label != g.constraint) {
            out.rejected.push_back({g, "not_label_consistent"});
        } else if (g.constraint == originals[it->second].label) {
            out.rejected.push_back({g, "same_label_as_original"});
        } else if (partner[it->second]) {
            out.rejected.push_back({g, "duplicate_pseudo"});
        } else {
            partner[it->second] = &g;
        }
    }
    for (std::size_t i = 0; i < originals.size(); ++i) {
        const auto& o = originals[i];
        if (!partner[i]) {
            ++out.abstracts_without_pseudo;
            continue;
        }
        out.instances.push_back({o.abstract_id, o.abstract, o.title, o.label, Provenance::Original});
        out.instances.push_back({o.abstract_id, o.abstract, partner[i]->text, partner[i]->constraint, Provenance::Pseudo});
    }
    return out;
}

inline std::string merge_summary(const MergeResult& m) {
    std::string s = with_commas(m.instances.size()) + " instances in total (" + with_commas(m.instances.size() / 2) +
                    " abstracts), " + percent(m.pseudo_share(), 0) + " pseudo\n";
    if (m.abstracts_without_pseudo)
        s += with_commas(m.abstracts_without_pseudo) + " abstract(s) dropped for lack of a surviving pseudo title\n";
    std::map<std::string, std::size_t> by_reason;
    for (const auto& r : m.rejected) ++by_reason[r.reason];
    for (const auto& [reason, n] : by_reason) s += with_commas(n) + " pseudo title(s) rejected: " + reason + "\n";
    return s;
}

inline std::string training_to_jsonl(const std::vector<TrainingInstance>& xs) {
    std::vector<json> rows;
    for (const auto& x : xs)
        rows.push_back({{"abstract_id", x.abstract_id},
                        {"abstract", x.abstract},
                        {"title", x.title},
                        {"label", x.label},
                        {"provenance", to_string(x.provenance)}});
    return to_jsonl(rows);
}

inline std::vector<TrainingInstance> training_from_jsonl(std::string_view text) {
    std::vector<TrainingInstance> out;
    for_each_jsonl(text, [&](const json& o, std::size_t line) {
        TrainingInstance x;
        x.abstract_id = field_as<std::string>(o, "abstract_id", line);
        x.abstract = field_as<std::string>(o, "abstract", line);
        x.title = field_as<std::string>(o, "title", line);
        x.label = field_as<int>(o, "label", line);
        check_binary(x.label, "label", line);
        const auto p = field_as<std::string>(o, "provenance", line);
        if (p != "original" && p != "pseudo") fail_data("bad_field", "line " + std::to_string(line) + ": provenance '" + p + "'");
        x.provenance = p == "pseudo" ? Provenance::Pseudo : Provenance::Original;
        out.push_back(std::move(x));
    });
    return out;
}

} // namespace a2t::pseudo

#endif // A2T_PSEUDO_HPP
