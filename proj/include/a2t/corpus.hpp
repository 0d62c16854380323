#ifndef A2T_CORPUS_HPP
#define A2T_CORPUS_HPP

// Abstract-title corpus: ingestion, filtering, tokenization, and the
// quota-constrained train/dev/test split.

#include <a2t/error.hpp>
#include <a2t/io.hpp>
#include <a2t/random.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace a2t::corpus {

enum class Source { NLP, ML };

enum class HumorLevel : int { NotFunny = 0, MediumFunny = 1, Funny = 2 };

enum class LabelOrigin { Human, Classifier, None };

// {1,2} collapse to the binary FUNNY class.
constexpr bool is_funny_binary(HumorLevel level) noexcept { return level != HumorLevel::NotFunny; }

constexpr int to_binary(HumorLevel level) noexcept { return is_funny_binary(level) ? 1 : 0; }

inline std::string_view to_string(Source s) { return s == Source::NLP ? "NLP" : "ML"; }

inline std::string_view to_string(LabelOrigin o) {
    switch (o) {
    case LabelOrigin::Human: return "Human";
    case LabelOrigin::Classifier: return "Classifier";
    case LabelOrigin::None: return "None";
    }
    return "None";
}

inline Source parse_source(std::string_view s, std::size_t line) {
    if (s == "NLP") return Source::NLP;
    if (s == "ML") return Source::ML;
    fail_data("bad_source", "line " + std::to_string(line) + ": source must be NLP or ML, got '" + std::string(s) + "'");
}

inline LabelOrigin parse_origin(std::string_view s, std::size_t line) {
    if (s == "Human") return LabelOrigin::Human;
    if (s == "Classifier") return LabelOrigin::Classifier;
    if (s == "None" || s.empty()) return LabelOrigin::None;
    fail_data("bad_origin", "line " + std::to_string(line) + ": unknown humor_label_origin '" + std::string(s) + "'");
}

inline HumorLevel parse_humor_level(long long v, std::size_t line) {
    if (v < 0 || v > 2)
        fail_data("bad_humor_label", "line " + std::to_string(line) + ": humor_label must be 0, 1 or 2");
    return static_cast<HumorLevel>(v);
}

struct PaperRecord {
    std::string id;
    std::string title;
    std::string abstract;
    std::string venue;
    int year = 0;
    Source source = Source::NLP;
    std::optional<HumorLevel> humor_label;
    LabelOrigin humor_label_origin = LabelOrigin::None;

    friend bool operator==(const PaperRecord&, const PaperRecord&) = default;
};

inline PaperRecord record_from_json(const json& obj, std::size_t line) {
    if (!obj.is_object()) fail_data("jsonl_malformed", "line " + std::to_string(line) + ": expected an object");
    PaperRecord r;
    r.id = field_as<std::string>(obj, "id", line);
    r.title = field_as<std::string>(obj, "title", line);
    r.abstract = field_as<std::string>(obj, "abstract", line);
    r.venue = field_as<std::string>(obj, "venue", line);
    r.year = field_as<int>(obj, "year", line);
    r.source = parse_source(field_as<std::string>(obj, "source", line), line);
    if (const auto it = obj.find("humor_label"); it != obj.end() && !it->is_null()) {
        if (!it->is_number_integer())
            fail_data("bad_humor_label", "line " + std::to_string(line) + ": humor_label must be null, 0, 1 or 2");
        r.humor_label = parse_humor_level(it->get<long long>(), line);
    }
    if (const auto it = obj.find("humor_label_origin"); it != obj.end() && !it->is_null())
        r.humor_label_origin = parse_origin(field_as<std::string>(obj, "humor_label_origin", line), line);
    return r;
}

inline json record_to_json(const PaperRecord& r) {
    json o = json::object();
    o["id"] = r.id;
    o["title"] = r.title;
    o["abstract"] = r.abstract;
    o["venue"] = r.venue;
    o["year"] = r.year;
    o["source"] = to_string(r.source);
    o["humor_label"] = r.humor_label ? json(static_cast<int>(*r.humor_label)) : json(nullptr);
    o["humor_label_origin"] = to_string(r.humor_label_origin);
    return o;
}

namespace detail {

inline void check_record(const PaperRecord& r, std::size_t line, std::set<std::string>& seen,
                         std::map<std::string, std::size_t>& first_line) {
    const auto where = "line " + std::to_string(line);
    if (r.id.empty()) fail_data("empty_id", where + ": empty id");
    if (r.title.empty()) fail_data("empty_title", where + ": record '" + r.id + "' has an empty title");
    if (r.abstract.empty()) fail_data("empty_abstract", where + ": record '" + r.id + "' has an empty abstract");
    if (!seen.insert(r.id).second)
        fail_data("duplicate_id", where + ": duplicate id '" + r.id + "' (first seen on line " +
                                      std::to_string(first_line[r.id]) + ")");
    first_line[r.id] = line;
}

} // namespace detail

inline std::vector<PaperRecord> parse_corpus_jsonl(std::string_view text) {
    std::vector<PaperRecord> out;
    std::set<std::string> seen;
    std::map<std::string, std::size_t> first_line;
    for_each_jsonl(text, [&](const json& obj, std::size_t line) {
        auto r = record_from_json(obj, line);
        detail::check_record(r, line, seen, first_line);
        out.push_back(std::move(r));
    });
    return out;
}

inline std::vector<PaperRecord> parse_corpus_csv(std::string_view text) {
    const auto table = parse_csv(text);
    std::vector<PaperRecord> out;
    if (table.header.empty()) return out;
    const auto c_id = table.column("id"), c_title = table.column("title"), c_abs = table.column("abstract"),
               c_venue = table.column("venue"), c_year = table.column("year"), c_src = table.column("source");
    const auto c_label = table.has_column("humor_label") ? std::optional(table.column("humor_label")) : std::nullopt;
    const auto c_origin =
        table.has_column("humor_label_origin") ? std::optional(table.column("humor_label_origin")) : std::nullopt;

    std::set<std::string> seen;
    std::map<std::string, std::size_t> first_line;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto line = table.line_numbers[i];
        PaperRecord r;
        r.id = row[c_id];
        r.title = row[c_title];
        r.abstract = row[c_abs];
        r.venue = row[c_venue];
        try {
            r.year = static_cast<int>(parse_int(row[c_year], "year"));
        } catch (const Error& e) {
            fail_data("bad_field", "line " + std::to_string(line) + ": " + e.what());
        }
        r.source = parse_source(row[c_src], line);
        if (c_label && !row[*c_label].empty() && row[*c_label] != "null")
            r.humor_label = parse_humor_level(parse_int(row[*c_label], "humor_label"), line);
        if (c_origin) r.humor_label_origin = parse_origin(row[*c_origin], line);
        detail::check_record(r, line, seen, first_line);
        out.push_back(std::move(r));
    }
    return out;
}

enum class CorpusFormat { JSONL, CSV };

inline std::vector<PaperRecord> load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    const auto text = read_file(path);
    return format == CorpusFormat::JSONL ? parse_corpus_jsonl(text) : parse_corpus_csv(text);
}

inline std::string to_jsonl(const std::vector<PaperRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

// --- filtering ---------------------------------------------------------------

struct FilterConfig {
    int max_abstract_words = 400;  // strict upper bound
    int min_year = 2001;           // inclusive
    bool main_conference_only = false;
    std::set<std::string> venue_allow_list;
};

inline std::size_t whitespace_word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

inline bool passes_filter(const PaperRecord& r, const FilterConfig& cfg) {
    if (whitespace_word_count(r.abstract) >= static_cast<std::size_t>(cfg.max_abstract_words)) return false;
    if (r.year < cfg.min_year) return false;
    if (cfg.main_conference_only && !cfg.venue_allow_list.contains(r.venue)) return false;
    return true;
}

inline std::vector<PaperRecord> filter_corpus(const std::vector<PaperRecord>& records, const FilterConfig& cfg) {
    if (cfg.max_abstract_words <= 0) fail_usage("bad_filter_config", "max_abstract_words must be positive");
    std::vector<PaperRecord> out;
    for (const auto& r : records)
        if (passes_filter(r, cfg)) out.push_back(r);
    return out;
}

// --- tokenization ------------------------------------------------------------

inline constexpr std::string_view kStopwordsVersion = "en-v1";

// Mirrors data/stopwords-en-v1.txt.
inline constexpr std::string_view kStopwordsEnV1 =
    "i me my myself we our ours ourselves you your yours yourself yourselves he him his "
    "himself she her hers herself it its itself they them their theirs themselves what "
    "which who whom this that these those am is are was were be been being have has had "
    "having do does did doing a an the and but if or because as until while of at by for "
    "with about against between into through during before after above below to from up "
    "down in out on off over under again further then once here there when where why how "
    "all any both each few more most other some such no nor not only own same so than too "
    "very s t can will just don should now d ll m o re ve y via vs ";

class StopwordList {
public:
    StopwordList(std::string version, std::unordered_set<std::string> words)
        : version_(std::move(version)), words_(std::move(words)) {}

    static StopwordList from_text(std::string version, std::string_view text) {
        std::unordered_set<std::string> words;
        std::string cur;
        for (char c : text) {
            if (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
                if (!cur.empty() && cur[0] != '#') words.insert(cur);
                cur.clear();
            } else {
                cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            }
        }
        if (!cur.empty() && cur[0] != '#') words.insert(cur);
        return StopwordList(std::move(version), std::move(words));
    }

    static const StopwordList& default_list() {
        static const StopwordList list = from_text(std::string(kStopwordsVersion), kStopwordsEnV1);
        return list;
    }

    bool contains(std::string_view w) const { return words_.contains(std::string(w)); }
    const std::string& version() const noexcept { return version_; }
    std::size_t size() const noexcept { return words_.size(); }

private:
    std::string version_;
    std::unordered_set<std::string> words_;
};

// Lowercased maximal runs of ASCII alphanumerics; bytes >= 0x80 count as
// word characters so UTF-8 letters stay inside their token. Every other
// character (whitespace, punctuation, hyphens, apostrophes) separates.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

inline std::vector<std::string> content_words(std::string_view text,
                                              const StopwordList& stopwords = StopwordList::default_list()) {
    std::vector<std::string> out;
    for (auto& tok : tokenize(text))
        if (!stopwords.contains(tok)) out.push_back(std::move(tok));
    return out;
}

// --- constrained split -------------------------------------------------------

struct SplitSpec {
    std::size_t dev_size = 600;
    std::size_t test_size = 600;
    double devtest_source_ratio = 0.8;       // fraction NLP
    double devtest_funny_ratio = 1.0 / 3.0;  // fraction binary FUNNY
    bool pin_human_annotated_to_train = true;
    std::uint64_t seed = 0;
};

inline json spec_to_json(const SplitSpec& s) {
    return json{{"dev_size", s.dev_size},
                {"test_size", s.test_size},
                {"devtest_source_ratio", s.devtest_source_ratio},
                {"devtest_funny_ratio", s.devtest_funny_ratio},
                {"pin_human_annotated_to_train", s.pin_human_annotated_to_train},
                {"seed", s.seed}};
}

inline SplitSpec spec_from_json(const json& j) {
    SplitSpec s;
    try {
        s.dev_size = j.value("dev_size", s.dev_size);
        s.test_size = j.value("test_size", s.test_size);
        s.devtest_source_ratio = j.value("devtest_source_ratio", s.devtest_source_ratio);
        s.devtest_funny_ratio = j.value("devtest_funny_ratio", s.devtest_funny_ratio);
        s.pin_human_annotated_to_train = j.value("pin_human_annotated_to_train", s.pin_human_annotated_to_train);
        s.seed = j.value("seed", s.seed);
    } catch (const json::exception& e) {
        fail_usage("bad_split_spec", std::string("split spec: ") + e.what());
    }
    return s;
}

struct DatasetSplit {
    std::vector<PaperRecord> train;
    std::vector<PaperRecord> dev;
    std::vector<PaperRecord> test;
};

// Two-class integer quotas: floor both shares, then hand the remainder to
// the larger class (the first class on a tie).
inline std::array<std::size_t, 2> two_class_quota(std::size_t total, double first_fraction) {
    const double a = static_cast<double>(total) * first_fraction;
    const double b = static_cast<double>(total) * (1.0 - first_fraction);
    // Tolerance absorbs representation error such as 600 * (1/3).
    auto fl = [](double v) { return static_cast<std::size_t>(std::floor(v + 1e-9)); };
    std::array<std::size_t, 2> q{std::min(fl(a), total), std::min(fl(b), total)};
    if (q[0] + q[1] > total) q[1] = total - q[0];
    const std::size_t rem = total - q[0] - q[1];
    q[q[0] >= q[1] ? 0 : 1] += rem;
    return q;
}

namespace detail {

// Cell index: label (0 = NotFunny, 1 = Funny) * 2 + source (0 = NLP, 1 = ML).
constexpr std::size_t cell(int funny, Source s) { return static_cast<std::size_t>(funny) * 2 + (s == Source::NLP ? 0 : 1); }

inline std::string cell_name(std::size_t c) {
    static const char* names[] = {"NotFunny/NLP", "NotFunny/ML", "FUNNY/NLP", "FUNNY/ML"};
    return names[c];
}

// Chooses a 2x2 label-by-source count table whose margins equal the quotas
// and that fits the available pool. The FUNNY/NLP cell is set as close to
// the independence value as the pool permits.
inline std::array<std::size_t, 4> allocate_cells(std::string_view split_name, std::size_t size,
                                                 std::size_t funny, std::size_t nlp,
                                                 const std::array<std::size_t, 4>& avail) {
    using ll = long long;
    const ll F = static_cast<ll>(funny), N = static_cast<ll>(nlp);
    const ll NF = static_cast<ll>(size) - F, ML = static_cast<ll>(size) - N;
    const ll aFN = static_cast<ll>(avail[cell(1, Source::NLP)]), aFM = static_cast<ll>(avail[cell(1, Source::ML)]);
    const ll aNN = static_cast<ll>(avail[cell(0, Source::NLP)]), aNM = static_cast<ll>(avail[cell(0, Source::ML)]);

    auto shortfall = [&](const std::string& what, ll need, ll have) {
        fail_infeasible("split_quota",
                        std::string(split_name) + " " + what + " quota needs " + std::to_string(need) +
                            ", pool has " + std::to_string(have) + " (short by " + std::to_string(need - have) + ")");
    };
    if (F > aFN + aFM) shortfall("FUNNY", F, aFN + aFM);
    if (NF > aNN + aNM) shortfall("NotFunny", NF, aNN + aNM);
    if (N > aFN + aNN) shortfall("NLP", N, aFN + aNN);
    if (ML > aFM + aNM) shortfall("ML", ML, aFM + aNM);

    // x = FUNNY/NLP count; the other three cells follow from the margins.
    const ll lo = std::max({0LL, F - ML, F - aFM, N - aNN});
    const ll hi = std::min({F, N, aFN, aNM - ML + F});
    if (lo > hi)
        fail_infeasible("split_quota", std::string(split_name) +
                                           " label/source quotas cannot be met jointly: FUNNY/NLP cell needs at least " +
                                           std::to_string(lo) + " but at most " + std::to_string(hi) + " fit");
    const ll target = static_cast<ll>(std::llround(static_cast<double>(F) * static_cast<double>(N) /
                                                   std::max<double>(1.0, static_cast<double>(size))));
    const ll x = std::clamp(target, lo, hi);
    std::array<std::size_t, 4> out{};
    out[cell(1, Source::NLP)] = static_cast<std::size_t>(x);
    out[cell(1, Source::ML)] = static_cast<std::size_t>(F - x);
    out[cell(0, Source::NLP)] = static_cast<std::size_t>(N - x);
    out[cell(0, Source::ML)] = static_cast<std::size_t>(ML - F + x);
    return out;
}

} // namespace detail

// Output lists are ordered by id so exports are independent of input order.
inline DatasetSplit make_constrained_split(const std::vector<PaperRecord>& records, const SplitSpec& spec) {
    if (spec.devtest_source_ratio < 0.0 || spec.devtest_source_ratio > 1.0 || spec.devtest_funny_ratio < 0.0 ||
        spec.devtest_funny_ratio > 1.0)
        fail_usage("bad_split_spec", "split ratios must lie in [0, 1]");
    if (spec.dev_size + spec.test_size >= records.size())
        fail_infeasible("split_size", "dev_size + test_size = " + std::to_string(spec.dev_size + spec.test_size) +
                                          " must be smaller than the corpus size " + std::to_string(records.size()));

    std::vector<const PaperRecord*> sorted;
    sorted.reserve(records.size());
    for (const auto& r : records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });

    std::array<std::vector<const PaperRecord*>, 4> pool;
    for (const auto* r : sorted) {
        if (!r->humor_label) continue;
        if (spec.pin_human_annotated_to_train && r->humor_label_origin == LabelOrigin::Human) continue;
        pool[detail::cell(to_binary(*r->humor_label), r->source)].push_back(r);
    }

    Rng rng(derive_seed(spec.seed, "constrained-split"));
    for (auto& cell : pool) rng.shuffle(cell);

    std::set<std::string> held_out;
    auto draw = [&](std::string_view name, std::size_t size) {
        const auto [funny, not_funny] = two_class_quota(size, spec.devtest_funny_ratio);
        (void)not_funny;
        const auto [nlp, ml] = two_class_quota(size, spec.devtest_source_ratio);
        (void)ml;
        std::array<std::size_t, 4> avail{};
        for (std::size_t c = 0; c < 4; ++c) avail[c] = pool[c].size();
        const auto take = detail::allocate_cells(name, size, funny, nlp, avail);
        std::vector<PaperRecord> out;
        for (std::size_t c = 0; c < 4; ++c) {
            // Pools are shuffled; draw from the back.
            for (std::size_t k = 0; k < take[c]; ++k) {
                out.push_back(*pool[c].back());
                held_out.insert(pool[c].back()->id);
                pool[c].pop_back();
            }
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        return out;
    };

    DatasetSplit split;
    split.dev = draw("dev", spec.dev_size);
    split.test = draw("test", spec.test_size);
    for (const auto* r : sorted)
        if (!held_out.contains(r->id)) split.train.push_back(*r);
    return split;
}

inline void write_split(const std::filesystem::path& dir, const DatasetSplit& split, const SplitSpec& spec) {
    write_file(dir / "train.jsonl", to_jsonl(split.train));
    write_file(dir / "dev.jsonl", to_jsonl(split.dev));
    write_file(dir / "test.jsonl", to_jsonl(split.test));
    json manifest = {{"seed", spec.seed},
                     {"spec", spec_to_json(spec)},
                     {"counts", {{"train", split.train.size()}, {"dev", split.dev.size()}, {"test", split.test.size()}}}};
    write_file(dir / "split_manifest.json", manifest.dump(2) + "\n");
}

} // namespace a2t::corpus

#endif // A2T_CORPUS_HPP
