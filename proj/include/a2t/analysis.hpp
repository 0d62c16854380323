#ifndef A2T_ANALYSIS_HPP
#define A2T_ANALYSIS_HPP

// Descriptive title analyses: content-word overlap with the abstract, title
// length, and a windowed token edit-distance overlap.

#include <a2t/corpus.hpp>
#include <a2t/error.hpp>
#include <a2t/io.hpp>
#include <a2t/report.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace a2t::analysis {

using corpus::StopwordList;
using corpus::tokenize;

// Pinned definition, printed in every report header.
inline constexpr std::string_view kEditOverlapDefinition =
    "edit_overlap = 1 - min over abstract token windows w with |len(w) - len(title)| <= 2 of "
    "token_levenshtein(title, w) / max(len(title), len(w)); whole abstract when it is too short";

// Type-level: |content(title) & content(abstract)| / |content(title)|.
// nullopt when the title has no content words.
inline std::optional<double> lexical_overlap(std::string_view title, std::string_view abstract,
                                             const StopwordList& stopwords = StopwordList::default_list()) {
    const auto tw = corpus::content_words(title, stopwords);
    const std::set<std::string> t(tw.begin(), tw.end());
    if (t.empty()) return std::nullopt;
    const auto aw = corpus::content_words(abstract, stopwords);
    const std::set<std::string> a(aw.begin(), aw.end());
    std::size_t hit = 0;
    for (const auto& w : t) hit += a.contains(w);
    return static_cast<double>(hit) / static_cast<double>(t.size());
}

inline std::size_t token_levenshtein(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// nullopt for an empty title.
inline std::optional<double> edit_overlap(std::string_view title, std::string_view abstract) {
    const auto t = tokenize(title);
    const auto a = tokenize(abstract);
    if (t.empty()) return std::nullopt;
    auto sim = [&](std::span<const std::string> w) {
        const double d = static_cast<double>(token_levenshtein(t, w));
        return 1.0 - d / static_cast<double>(std::max(t.size(), w.size()));
    };
    const std::size_t lo = t.size() > 2 ? t.size() - 2 : 1;
    const std::size_t hi = t.size() + 2;
    if (a.size() < lo) return sim(a);
    double best = 0.0;
    for (std::size_t len = lo; len <= std::min(hi, a.size()); ++len)
        for (std::size_t s = 0; s + len <= a.size(); ++s) {
            best = std::max(best, sim(std::span<const std::string>(a).subspan(s, len)));
            if (best == 1.0) return best;
        }
    return best;
}

struct LengthStats {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
};

inline LengthStats length_stats(const std::vector<std::string>& titles) {
    LengthStats s;
    s.n = titles.size();
    if (titles.empty()) return s;
    std::vector<double> lens;
    for (const auto& t : titles) lens.push_back(static_cast<double>(tokenize(t).size()));
    s.mean = std::accumulate(lens.begin(), lens.end(), 0.0) / static_cast<double>(lens.size());
    std::sort(lens.begin(), lens.end());
    const auto m = lens.size() / 2;
    s.median = lens.size() % 2 ? lens[m] : (lens[m - 1] + lens[m]) / 2.0;
    return s;
}

// "14.95 vs. 8.27 tokens"
inline std::string length_comparison(const LengthStats& a, const LengthStats& b) {
    return fixed(a.mean, 2) + " vs. " + fixed(b.mean, 2) + " tokens";
}

// --- per-system report ----------------------------------------------------------------

struct TitleSample {
    std::string system;
    std::string abstract_id;
    std::string title;
    std::string abstract;
};

// CSV with columns system,abstract_id,title,abstract.
inline std::vector<TitleSample> parse_samples_csv(std::string_view text) {
    const auto t = parse_csv(text);
    std::vector<TitleSample> out;
    if (t.header.empty()) return out;
    const auto cs = t.column("system"), ci = t.column("abstract_id"), ct = t.column("title"), ca = t.column("abstract");
    for (const auto& r : t.rows) out.push_back({r[cs], r[ci], r[ct], r[ca]});
    return out;
}

struct OverlapReport {
    std::string system;
    std::size_t n_titles = 0;
    double mean_lexical_overlap = 0.0;
    std::size_t lexical_undefined = 0;  // titles without content words, left out of the mean
    LengthStats length;
    double mean_edit_overlap = 0.0;
    std::size_t edit_undefined = 0;
};

// One row per system, in first-appearance order.
inline std::vector<OverlapReport> overlap_report(const std::vector<TitleSample>& samples,
                                                 const StopwordList& stopwords = StopwordList::default_list()) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const TitleSample*>> by;
    for (const auto& s : samples) {
        if (!by.contains(s.system)) order.push_back(s.system);
        by[s.system].push_back(&s);
    }
    std::vector<OverlapReport> out;
    for (const auto& sys : order) {
        OverlapReport r;
        r.system = sys;
        double lex = 0, edit = 0;
        std::size_t n_lex = 0, n_edit = 0;
        std::vector<std::string> titles;
        for (const auto* s : by[sys]) {
            ++r.n_titles;
            titles.push_back(s->title);
            if (const auto v = lexical_overlap(s->title, s->abstract, stopwords)) {
                lex += *v;
                ++n_lex;
            } else {
                ++r.lexical_undefined;
            }
            if (const auto v = edit_overlap(s->title, s->abstract)) {
                edit += *v;
                ++n_edit;
            } else {
                ++r.edit_undefined;
            }
        }
        r.mean_lexical_overlap = n_lex ? lex / static_cast<double>(n_lex) : 0.0;
        r.mean_edit_overlap = n_edit ? edit / static_cast<double>(n_edit) : 0.0;
        r.length = length_stats(titles);
        out.push_back(std::move(r));
    }
    return out;
}

inline TextTable overlap_table(const std::vector<OverlapReport>& rows) {
    TextTable t({"system", "titles", "content_overlap", "undefined", "mean_len", "median_len", "edit_overlap"});
    for (const auto& r : rows)
        t.add_row({r.system, std::to_string(r.n_titles), fixed(r.mean_lexical_overlap, 4), std::to_string(r.lexical_undefined),
                   fixed(r.length.mean, 2), fixed(r.length.median, 1), fixed(r.mean_edit_overlap, 4)});
    return t;
}

inline std::string overlap_report_csv(const std::vector<OverlapReport>& rows, const StopwordList& stopwords) {
    return "# stopwords " + stopwords.version() + "\n# " + std::string(kEditOverlapDefinition) + "\n" +
           overlap_table(rows).render_csv();
}

inline std::string overlap_report_markdown(const std::vector<OverlapReport>& rows, const StopwordList& stopwords) {
    return "Stopwords: " + stopwords.version() + "\n\n" + std::string(kEditOverlapDefinition) + "\n\n" +
           overlap_table(rows).render_markdown();
}

} // namespace a2t::analysis

#endif // A2T_ANALYSIS_HPP
