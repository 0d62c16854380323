#ifndef A2T_ANNOTATION_HPP
#define A2T_ANNOTATION_HPP

// Annotation campaigns (best-worst of 6, ranking of 5 with ties, pairwise
// choice), judgment validation, the append-only judgment log, and
// inter-annotator agreement.

#include <a2t/error.hpp>
#include <a2t/io.hpp>
#include <a2t/random.hpp>
#include <a2t/stats.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace a2t::annotation {

enum class TaskKind { BestWorst, Ranking, Pairwise };

constexpr std::size_t arity(TaskKind k) noexcept {
    switch (k) {
    case TaskKind::BestWorst: return 6;
    case TaskKind::Ranking: return 5;
    case TaskKind::Pairwise: return 2;
    }
    return 0;
}

inline std::string_view to_string(TaskKind k) {
    switch (k) {
    case TaskKind::BestWorst: return "best_worst";
    case TaskKind::Ranking: return "ranking";
    case TaskKind::Pairwise: return "pairwise";
    }
    return "";
}

inline TaskKind parse_kind(std::string_view s) {
    if (s == "best_worst") return TaskKind::BestWorst;
    if (s == "ranking") return TaskKind::Ranking;
    if (s == "pairwise") return TaskKind::Pairwise;
    fail_data("bad_kind", "unknown task kind '" + std::string(s) + "'");
}

struct Candidate {
    std::string id;
    std::string title;
    std::string system_tag;  // never shown to annotators
};

struct TaskInstance {
    std::string id;
    std::string abstract_id;
    std::string abstract_text;
    std::vector<Candidate> candidates;

    const Candidate* find_candidate(std::string_view cid) const {
        for (const auto& c : candidates)
            if (c.id == cid) return &c;
        return nullptr;
    }
};

// Round-robin: instance k goes to annotators[(k*per + r) mod n], r < per.
// An explicit map (instance id -> annotators) overrides round-robin.
struct AssignmentPolicy {
    std::vector<std::string> annotators;
    std::size_t annotators_per_instance = 2;
    std::map<std::string, std::vector<std::string>> explicit_assignment;
    std::uint64_t seed = 0;
};

struct Campaign {
    std::string id;
    TaskKind kind = TaskKind::BestWorst;
    std::vector<TaskInstance> instances;
    std::size_t min_annotators_per_instance = 2;
    std::size_t max_annotators_per_instance = 5;
    std::vector<std::string> criteria{"overall"};  // ranking criteria, e.g. quality + humor
    std::uint64_t seed = 0;
    std::map<std::string, std::vector<std::string>> assignment;  // instance id -> annotators
    // (instance id, annotator id) -> permutation of candidate indices
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> presentation;

    const TaskInstance* find_instance(std::string_view iid) const {
        for (const auto& i : instances)
            if (i.id == iid) return &i;
        return nullptr;
    }

    bool is_assigned(std::string_view iid, std::string_view annotator) const {
        const auto it = assignment.find(std::string(iid));
        return it != assignment.end() && std::find(it->second.begin(), it->second.end(), annotator) != it->second.end();
    }

    // Instances assigned to an annotator, in campaign order.
    std::vector<std::string> instances_for(std::string_view annotator) const {
        std::vector<std::string> out;
        for (const auto& inst : instances)
            if (is_assigned(inst.id, annotator)) out.push_back(inst.id);
        return out;
    }

    std::set<std::string> annotators() const {
        std::set<std::string> out;
        for (const auto& [iid, as] : assignment) out.insert(as.begin(), as.end());
        return out;
    }

    const std::vector<std::size_t>& presentation_order(const std::string& iid, const std::string& annotator) const {
        const auto it = presentation.find({iid, annotator});
        if (it == presentation.end())
            fail_data("unassigned_annotator", "annotator '" + annotator + "' is not assigned to '" + iid + "'");
        return it->second;
    }
};

inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed, const std::string& iid,
                                                   const std::string& annotator) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(derive_seed(seed, iid), annotator));
    rng.shuffle(perm);
    return perm;
}

inline void assign(Campaign& c, const AssignmentPolicy& policy) {
    c.assignment.clear();
    c.presentation.clear();
    if (!policy.explicit_assignment.empty()) {
        for (const auto& [iid, as] : policy.explicit_assignment) {
            if (!c.find_instance(iid)) fail_data("unknown_instance", "assignment names unknown instance '" + iid + "'");
            std::set<std::string> uniq(as.begin(), as.end());
            if (uniq.size() != as.size())
                fail_data("duplicate_annotator", "instance '" + iid + "' lists an annotator twice");
            c.assignment[iid] = as;
        }
    } else if (!policy.annotators.empty()) {
        const auto n = policy.annotators.size();
        const auto per = policy.annotators_per_instance;
        if (per == 0 || per > n)
            fail_usage("bad_assignment",
                       "annotators_per_instance must be in [1, " + std::to_string(n) + "], got " + std::to_string(per));
        for (std::size_t k = 0; k < c.instances.size(); ++k)
            for (std::size_t r = 0; r < per; ++r)
                c.assignment[c.instances[k].id].push_back(policy.annotators[(k * per + r) % n]);
    }
    for (const auto& [iid, as] : c.assignment) {
        if (as.size() > c.max_annotators_per_instance)
            fail_usage("bad_assignment", "instance '" + iid + "' has " + std::to_string(as.size()) +
                                             " annotators, above the maximum " +
                                             std::to_string(c.max_annotators_per_instance));
        const auto n = c.find_instance(iid)->candidates.size();
        for (const auto& a : as) c.presentation[{iid, a}] = seeded_permutation(n, c.seed, iid, a);
    }
}

inline Campaign create_campaign(std::string id, TaskKind kind, std::vector<TaskInstance> instances,
                                const AssignmentPolicy& policy, std::size_t min_annotators = 2,
                                std::size_t max_annotators = 5,
                                std::vector<std::string> criteria = {"overall"}) {
    if (min_annotators > max_annotators)
        fail_usage("bad_campaign", "min_annotators_per_instance exceeds max_annotators_per_instance");
    if (criteria.empty()) fail_usage("bad_campaign", "at least one criterion is required");
    std::set<std::string> ids;
    for (const auto& inst : instances) {
        if (!ids.insert(inst.id).second) fail_data("duplicate_instance", "duplicate instance id '" + inst.id + "'");
        if (inst.candidates.size() != arity(kind))
            fail_data("wrong_arity", "instance '" + inst.id + "' has " + std::to_string(inst.candidates.size()) +
                                         " candidates; " + std::string(to_string(kind)) + " needs " +
                                         std::to_string(arity(kind)));
        std::set<std::string> cids;
        for (const auto& cand : inst.candidates)
            if (!cids.insert(cand.id).second)
                fail_data("duplicate_candidate", "instance '" + inst.id + "' repeats candidate '" + cand.id + "'");
    }
    Campaign c;
    c.id = std::move(id);
    c.kind = kind;
    c.instances = std::move(instances);
    c.min_annotators_per_instance = min_annotators;
    c.max_annotators_per_instance = max_annotators;
    c.criteria = std::move(criteria);
    c.seed = policy.seed;
    assign(c, policy);
    return c;
}

// --- judgments ---------------------------------------------------------------

struct BwsSelection {
    std::string instance_id;
    std::string annotator_id;
    std::set<std::string> best;
    std::set<std::string> worst;
    std::int64_t timestamp = 0;

    friend bool operator==(const BwsSelection&, const BwsSelection&) = default;
};

struct RankAnnotation {
    std::string instance_id;
    std::string annotator_id;
    std::string criterion = "overall";
    std::map<std::string, int> rank_of;
    std::int64_t timestamp = 0;

    friend bool operator==(const RankAnnotation&, const RankAnnotation&) = default;
};

enum class PairOutcome { First, Second, Equal };

struct PairChoice {
    std::string instance_id;
    std::string annotator_id;
    PairOutcome choice = PairOutcome::Equal;
    std::int64_t timestamp = 0;

    friend bool operator==(const PairChoice&, const PairChoice&) = default;
};

using Judgment = std::variant<BwsSelection, RankAnnotation, PairChoice>;

inline const std::string& instance_of(const Judgment& j) {
    return std::visit([](const auto& x) -> const std::string& { return x.instance_id; }, j);
}

inline const std::string& annotator_of(const Judgment& j) {
    return std::visit([](const auto& x) -> const std::string& { return x.annotator_id; }, j);
}

// Effective-state key; criterion is empty except for rankings.
struct JudgmentKey {
    std::string instance_id;
    std::string annotator_id;
    std::string criterion;
    auto operator<=>(const JudgmentKey&) const = default;
};

inline JudgmentKey key_of(const Judgment& j) {
    JudgmentKey k{instance_of(j), annotator_of(j), {}};
    if (const auto* r = std::get_if<RankAnnotation>(&j)) k.criterion = r->criterion;
    return k;
}

inline std::string_view to_string(PairOutcome o) {
    switch (o) {
    case PairOutcome::First: return "first";
    case PairOutcome::Second: return "second";
    case PairOutcome::Equal: return "equal";
    }
    return "";
}

inline PairOutcome parse_outcome(std::string_view s) {
    if (s == "first") return PairOutcome::First;
    if (s == "second") return PairOutcome::Second;
    if (s == "equal") return PairOutcome::Equal;
    fail_data("bad_choice", "pairwise choice must be first, second or equal");
}

inline json judgment_to_json(const Judgment& j) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            json o{{"instance_id", x.instance_id}, {"annotator_id", x.annotator_id}, {"timestamp", x.timestamp}};
            if constexpr (std::is_same_v<T, BwsSelection>) {
                o["kind"] = "best_worst";
                o["best"] = x.best;
                o["worst"] = x.worst;
            } else if constexpr (std::is_same_v<T, RankAnnotation>) {
                o["kind"] = "ranking";
                o["criterion"] = x.criterion;
                o["ranks"] = x.rank_of;
            } else {
                o["kind"] = "pairwise";
                o["choice"] = to_string(x.choice);
            }
            return o;
        },
        j);
}

namespace detail {

inline std::set<std::string> id_set(const json& o, const char* key) {
    const auto it = o.find(key);
    if (it == o.end() || !it->is_array()) fail_data("bad_judgment", std::string("'") + key + "' must be a list of ids");
    std::set<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) fail_data("bad_judgment", std::string("'") + key + "' must contain strings");
        if (!out.insert(v.get<std::string>()).second)
            fail_data("duplicate_selection", std::string("'") + key + "' repeats candidate '" + v.get<std::string>() + "'");
    }
    return out;
}

inline std::string str_field(const json& o, const char* key) {
    const auto it = o.find(key);
    if (it == o.end() || !it->is_string()) fail_data("bad_judgment", std::string("missing string field '") + key + "'");
    return it->get<std::string>();
}

} // namespace detail

inline Judgment judgment_from_json(const json& o) {
    if (!o.is_object()) fail_data("bad_judgment", "judgment must be a JSON object");
    const auto kind = parse_kind(detail::str_field(o, "kind"));
    const auto iid = detail::str_field(o, "instance_id");
    const auto aid = detail::str_field(o, "annotator_id");
    std::int64_t ts = 0;
    if (const auto it = o.find("timestamp"); it != o.end() && it->is_number_integer()) ts = it->get<std::int64_t>();
    switch (kind) {
    case TaskKind::BestWorst:
        return BwsSelection{iid, aid, detail::id_set(o, "best"), detail::id_set(o, "worst"), ts};
    case TaskKind::Ranking: {
        RankAnnotation r{iid, aid, o.value("criterion", std::string("overall")), {}, ts};
        const auto it = o.find("ranks");
        if (it == o.end() || !it->is_object()) fail_data("bad_judgment", "'ranks' must map candidate ids to ranks");
        for (const auto& [cid, v] : it->items()) {
            if (!v.is_number_integer()) fail_data("bad_rank", "rank for '" + cid + "' must be an integer");
            r.rank_of[cid] = v.get<int>();
        }
        return r;
    }
    case TaskKind::Pairwise:
        return PairChoice{iid, aid, parse_outcome(detail::str_field(o, "choice")), ts};
    }
    fail_data("bad_judgment", "unreachable");
}

// Standard competition ranking: rank = 1 + number of strictly better items
// (smaller value = better). Ties share the rank, so 1,1,3 and not 1,1,2.
inline std::vector<int> competition_ranks(std::span<const double> values) {
    std::vector<int> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        int better = 0;
        for (double v : values)
            if (v < values[i]) ++better;
        out[i] = 1 + better;
    }
    return out;
}

inline bool is_tie_compressed(const std::map<std::string, int>& ranks) {
    std::vector<double> vals;
    for (const auto& [c, r] : ranks) {
        if (r < 1) return false;
        vals.push_back(r);
    }
    const auto expect = competition_ranks(vals);
    std::size_t i = 0;
    for (const auto& [c, r] : ranks)
        if (expect[i++] != r) return false;
    return true;
}

// Throws Error(Data) with a stable reason tag on any invariant breach.
inline void validate(const Campaign& c, const Judgment& j) {
    const auto& iid = instance_of(j);
    const auto& aid = annotator_of(j);
    const auto* inst = c.find_instance(iid);
    if (!inst) fail_data("unknown_instance", "unknown instance '" + iid + "'");
    if (!c.is_assigned(iid, aid))
        fail_data("unassigned_annotator", "annotator '" + aid + "' is not assigned to instance '" + iid + "'");
    auto check_ids = [&](const auto& ids) {
        for (const auto& cid : ids)
            if (!inst->find_candidate(cid))
                fail_data("unknown_candidate", "candidate '" + cid + "' is not part of instance '" + iid + "'");
    };
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, BwsSelection>) {
                if (c.kind != TaskKind::BestWorst) fail_data("kind_mismatch", "campaign does not take best-worst selections");
                if (x.best.size() != 2 || x.worst.size() != 2)
                    fail_data("bws_arity", "select exactly two best and two worst titles");
                for (const auto& b : x.best)
                    if (x.worst.contains(b))
                        fail_data("best_worst_overlap", "candidate '" + b + "' is selected as both best and worst");
                check_ids(x.best);
                check_ids(x.worst);
            } else if constexpr (std::is_same_v<T, RankAnnotation>) {
                if (c.kind != TaskKind::Ranking) fail_data("kind_mismatch", "campaign does not take rankings");
                if (std::find(c.criteria.begin(), c.criteria.end(), x.criterion) == c.criteria.end())
                    fail_data("unknown_criterion", "unknown ranking criterion '" + x.criterion + "'");
                std::vector<std::string> keys;
                for (const auto& [cid, r] : x.rank_of) keys.push_back(cid);
                check_ids(keys);
                if (x.rank_of.size() != inst->candidates.size())
                    fail_data("rank_incomplete", "every candidate must be ranked");
                if (!is_tie_compressed(x.rank_of))
                    fail_data("rank_not_compressed", "ranks must start at 1 and be tie-compressed (1,1,3 not 1,1,2)");
            } else {
                if (c.kind != TaskKind::Pairwise) fail_data("kind_mismatch", "campaign does not take pairwise choices");
            }
        },
        j);
}

// --- append-only log ---------------------------------------------------------

struct LogEntry {
    std::uint64_t seq = 0;
    std::string idempotency_key;
    Judgment judgment;
};

inline json entry_to_json(const LogEntry& e) {
    json o{{"seq", e.seq}, {"judgment", judgment_to_json(e.judgment)}};
    if (!e.idempotency_key.empty()) o["idempotency_key"] = e.idempotency_key;
    return o;
}

struct Receipt {
    std::uint64_t seq = 0;
    bool replaced_previous = false;
    bool duplicate = false;  // idempotent resubmission; nothing appended
};

class JudgmentLog {
public:
    JudgmentLog() = default;

    // Opens (creating if absent) a file-backed log and replays it. A torn
    // final line without its newline is an unacknowledged write and is cut
    // off; any other unreadable line means corruption.
    static JudgmentLog open(const std::filesystem::path& path) {
        JudgmentLog log;
        log.path_ = path;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::string text;
        if (std::filesystem::exists(path)) text = read_file(path);
        std::size_t good_end = 0;
        std::size_t pos = 0;
        std::size_t line_no = 0;
        while (pos < text.size()) {
            const auto nl = text.find('\n', pos);
            ++line_no;
            if (nl == std::string::npos) break;  // torn tail
            const auto line = std::string_view(text).substr(pos, nl - pos);
            if (!line.empty()) {
                try {
                    const auto o = json::parse(line);
                    LogEntry e;
                    e.seq = o.at("seq").get<std::uint64_t>();
                    e.idempotency_key = o.value("idempotency_key", std::string());
                    e.judgment = judgment_from_json(o.at("judgment"));
                    if (e.seq != log.entries_.size() + 1)
                        fail_data("corrupt_log", "sequence gap at line " + std::to_string(line_no));
                    log.remember(e);
                    log.entries_.push_back(std::move(e));
                } catch (const Error&) {
                    throw;
                } catch (const std::exception& ex) {
                    fail_data("corrupt_log", path.string() + " line " + std::to_string(line_no) + ": " + ex.what());
                }
            }
            pos = nl + 1;
            good_end = pos;
        }
        if (good_end < text.size()) std::filesystem::resize_file(path, good_end);
        log.fd_ = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
        if (log.fd_ < 0) fail_data("log_unwritable", "cannot open " + path.string() + ": " + std::strerror(errno));
        return log;
    }

    JudgmentLog(JudgmentLog&& o) noexcept
        : path_(std::move(o.path_)), fd_(std::exchange(o.fd_, -1)), entries_(std::move(o.entries_)),
          idempotency_(std::move(o.idempotency_)), latest_(std::move(o.latest_)) {}

    JudgmentLog& operator=(JudgmentLog&& o) noexcept {
        if (this != &o) {
            close_fd();
            path_ = std::move(o.path_);
            fd_ = std::exchange(o.fd_, -1);
            entries_ = std::move(o.entries_);
            idempotency_ = std::move(o.idempotency_);
            latest_ = std::move(o.latest_);
        }
        return *this;
    }

    JudgmentLog(const JudgmentLog&) = delete;
    JudgmentLog& operator=(const JudgmentLog&) = delete;
    ~JudgmentLog() { close_fd(); }

    // Durable (fsync'd) before returning when file-backed.
    Receipt append(Judgment j, std::string idempotency_key = {}) {
        if (!idempotency_key.empty()) {
            const auto it = idempotency_.find({annotator_of(j), idempotency_key});
            if (it != idempotency_.end()) return Receipt{it->second, false, true};
        }
        LogEntry e{entries_.size() + 1, std::move(idempotency_key), std::move(j)};
        if (fd_ >= 0) {
            const auto line = entry_to_json(e).dump() + "\n";
            std::size_t off = 0;
            while (off < line.size()) {
                const auto n = ::write(fd_, line.data() + off, line.size() - off);
                if (n < 0) {
                    if (errno == EINTR) continue;
                    fail_data("log_write_failed", std::string("judgment log write failed: ") + std::strerror(errno));
                }
                off += static_cast<std::size_t>(n);
            }
            if (::fsync(fd_) != 0)
                fail_data("log_write_failed", std::string("judgment log fsync failed: ") + std::strerror(errno));
        }
        const bool replaced = latest_.contains(key_of(e.judgment));
        remember(e);
        entries_.push_back(std::move(e));
        return Receipt{entries_.back().seq, replaced, false};
    }

    const std::vector<LogEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    void remember(const LogEntry& e) {
        if (!e.idempotency_key.empty()) idempotency_[{annotator_of(e.judgment), e.idempotency_key}] = e.seq;
        latest_[key_of(e.judgment)] = e.seq;
    }

    void close_fd() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

    std::filesystem::path path_;
    int fd_ = -1;
    std::vector<LogEntry> entries_;
    std::map<std::pair<std::string, std::string>, std::uint64_t> idempotency_;
    std::map<JudgmentKey, std::uint64_t> latest_;
};

// Effective state: the latest judgment per (instance, annotator, criterion).
using EffectiveState = std::map<JudgmentKey, Judgment>;

inline EffectiveState replay(const std::vector<LogEntry>& entries) {
    EffectiveState state;
    for (const auto& e : entries) state.insert_or_assign(key_of(e.judgment), e.judgment);
    return state;
}

inline std::string state_to_jsonl(const EffectiveState& state) {
    std::string out;
    for (const auto& [k, j] : state) {
        out += judgment_to_json(j).dump();
        out += '\n';
    }
    return out;
}

inline Receipt record_judgment(const Campaign& c, JudgmentLog& log, Judgment j, std::string idempotency_key = {}) {
    validate(c, j);
    return log.append(std::move(j), std::move(idempotency_key));
}

template <typename T>
std::vector<T> judgments_of(const EffectiveState& state) {
    std::vector<T> out;
    for (const auto& [k, j] : state)
        if (const auto* x = std::get_if<T>(&j)) out.push_back(*x);
    return out;
}

// --- agreement ---------------------------------------------------------------

struct PairAgreement {
    std::string annotator_a;
    std::string annotator_b;
    double value = 0.0;
    std::size_t shared_instances = 0;
};

struct AgreementReport {
    std::vector<PairAgreement> pairs;  // pairs with no shared instance are omitted
    double mean = 0.0;
};

// Per shared instance: (|best_a ∩ best_b| + |worst_a ∩ worst_b|) / 4.
inline double selection_agreement(const BwsSelection& a, const BwsSelection& b) {
    std::size_t shared = 0;
    for (const auto& x : a.best) shared += b.best.count(x);
    for (const auto& x : a.worst) shared += b.worst.count(x);
    return static_cast<double>(shared) / 4.0;
}

inline AgreementReport percentage_agreement(const EffectiveState& state) {
    std::map<std::string, std::map<std::string, const BwsSelection*>> by_annotator;
    for (const auto& [k, j] : state)
        if (const auto* s = std::get_if<BwsSelection>(&j)) by_annotator[s->annotator_id][s->instance_id] = s;
    AgreementReport report;
    for (auto a = by_annotator.begin(); a != by_annotator.end(); ++a) {
        for (auto b = std::next(a); b != by_annotator.end(); ++b) {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& [iid, sel] : a->second) {
                const auto it = b->second.find(iid);
                if (it == b->second.end()) continue;
                sum += selection_agreement(*sel, *it->second);
                ++n;
            }
            if (n == 0) continue;
            report.pairs.push_back({a->first, b->first, sum / static_cast<double>(n), n});
        }
    }
    if (report.pairs.empty()) fail_data("no_shared_instances", "no annotator pair shares an instance");
    for (const auto& p : report.pairs) report.mean += p.value;
    report.mean /= static_cast<double>(report.pairs.size());
    return report;
}

// kappa = (p_o - p_e) / (1 - p_e), p_e from the product of marginals.
template <typename Label>
double cohen_kappa(std::span<const Label> a, std::span<const Label> b, std::span<const Label> categories) {
    if (a.size() != b.size()) fail_data("length_mismatch", "kappa: label lists differ in length");
    if (a.empty()) fail_data("empty_input", "kappa: no labels");
    auto index = [&](const Label& l) {
        for (std::size_t i = 0; i < categories.size(); ++i)
            if (categories[i] == l) return i;
        fail_data("unknown_category", "kappa: label outside the category set");
    };
    std::vector<double> ma(categories.size(), 0.0), mb(categories.size(), 0.0);
    double agree = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto ia = index(a[i]), ib = index(b[i]);
        ma[ia] += 1.0;
        mb[ib] += 1.0;
        if (ia == ib) agree += 1.0;
    }
    const double n = static_cast<double>(a.size());
    const double p_o = agree / n;
    double p_e = 0.0;
    for (std::size_t c = 0; c < categories.size(); ++c) p_e += (ma[c] / n) * (mb[c] / n);
    if (p_e == 1.0) {
        if (p_o == 1.0) return 1.0;
        fail_data("undefined_kappa", "kappa undefined: chance agreement is 1 but observed agreement is not");
    }
    return (p_o - p_e) / (1.0 - p_e);
}

template <typename Label>
double cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b, const std::vector<Label>& categories) {
    return cohen_kappa(std::span<const Label>(a), std::span<const Label>(b), std::span<const Label>(categories));
}

struct SkippedInstance {
    std::string annotator_a;
    std::string annotator_b;
    std::string instance_id;
};

struct RankCorrelationReport {
    std::vector<PairAgreement> pairs;  // value = mean Spearman over shared instances
    std::vector<SkippedInstance> skipped;
    double mean = 0.0;
};

// Mean Spearman (average-rank ties) per annotator pair, then over pairs.
inline RankCorrelationReport pairwise_rank_correlation(const Campaign& c, const EffectiveState& state,
                                                       const std::string& criterion = "overall") {
    std::map<std::string, std::map<std::string, const RankAnnotation*>> by_annotator;
    for (const auto& [k, j] : state)
        if (const auto* r = std::get_if<RankAnnotation>(&j); r && r->criterion == criterion)
            by_annotator[r->annotator_id][r->instance_id] = r;
    RankCorrelationReport report;
    auto vec = [&](const RankAnnotation& r) {
        std::vector<double> v;
        for (const auto& cand : c.find_instance(r.instance_id)->candidates) v.push_back(r.rank_of.at(cand.id));
        return v;
    };
    for (auto a = by_annotator.begin(); a != by_annotator.end(); ++a) {
        for (auto b = std::next(a); b != by_annotator.end(); ++b) {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& [iid, ra] : a->second) {
                const auto it = b->second.find(iid);
                if (it == b->second.end()) continue;
                try {
                    sum += stats::spearman(vec(*ra), vec(*it->second));
                    ++n;
                } catch (const Error& e) {
                    if (e.reason() != "undefined_correlation") throw;
                    report.skipped.push_back({a->first, b->first, iid});
                }
            }
            if (n > 0) report.pairs.push_back({a->first, b->first, sum / static_cast<double>(n), n});
        }
    }
    if (report.pairs.empty()) fail_data("no_shared_instances", "no annotator pair shares a rankable instance");
    for (const auto& p : report.pairs) report.mean += p.value;
    report.mean /= static_cast<double>(report.pairs.size());
    return report;
}

// --- persistence and export --------------------------------------------------

inline json campaign_to_json(const Campaign& c) {
    json insts = json::array();
    for (const auto& i : c.instances) {
        json cands = json::array();
        for (const auto& cand : i.candidates)
            cands.push_back({{"id", cand.id}, {"title", cand.title}, {"system", cand.system_tag}});
        insts.push_back({{"id", i.id}, {"abstract_id", i.abstract_id}, {"abstract", i.abstract_text}, {"candidates", cands}});
    }
    json assignment = json::object();
    for (const auto& [iid, as] : c.assignment) assignment[iid] = as;
    json presentation = json::array();
    for (const auto& [key, perm] : c.presentation)
        presentation.push_back({{"instance_id", key.first}, {"annotator_id", key.second}, {"order", perm}});
    return json{{"format", "a2t-campaign"},
                {"version", 1},
                {"id", c.id},
                {"kind", to_string(c.kind)},
                {"min_annotators_per_instance", c.min_annotators_per_instance},
                {"max_annotators_per_instance", c.max_annotators_per_instance},
                {"criteria", c.criteria},
                {"seed", c.seed},
                {"instances", insts},
                {"assignment", assignment},
                {"presentation", presentation}};
}

inline std::vector<TaskInstance> instances_from_json(const json& arr) {
    std::vector<TaskInstance> out;
    for (const auto& i : arr) {
        TaskInstance inst;
        inst.id = i.at("id").get<std::string>();
        inst.abstract_id = i.value("abstract_id", inst.id);
        inst.abstract_text = i.value("abstract", std::string());
        for (const auto& cand : i.at("candidates"))
            inst.candidates.push_back(
                {cand.at("id").get<std::string>(), cand.value("title", std::string()), cand.value("system", std::string())});
        out.push_back(std::move(inst));
    }
    return out;
}

inline Campaign campaign_from_json(const json& j) {
    try {
        if (j.value("format", std::string()) != "a2t-campaign" || j.value("version", 0) != 1)
            fail_data("campaign_version", "not an a2t-campaign v1 document");
        Campaign c;
        c.id = j.at("id").get<std::string>();
        c.kind = parse_kind(j.at("kind").get<std::string>());
        c.min_annotators_per_instance = j.at("min_annotators_per_instance").get<std::size_t>();
        c.max_annotators_per_instance = j.at("max_annotators_per_instance").get<std::size_t>();
        c.criteria = j.at("criteria").get<std::vector<std::string>>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.instances = instances_from_json(j.at("instances"));
        for (const auto& [iid, as] : j.at("assignment").items()) c.assignment[iid] = as.get<std::vector<std::string>>();
        for (const auto& p : j.at("presentation"))
            c.presentation[{p.at("instance_id").get<std::string>(), p.at("annotator_id").get<std::string>()}] =
                p.at("order").get<std::vector<std::size_t>>();
        return c;
    } catch (const json::exception& e) {
        fail_data("corrupt_campaign", std::string("campaign document: ") + e.what());
    }
}

enum class ExportView { Annotator, Analysis };

// Task payload for one annotator: candidates in that annotator's order and
// without system tags.
inline json task_view(const Campaign& c, const TaskInstance& inst, const std::string& annotator) {
    json cands = json::array();
    for (auto idx : c.presentation_order(inst.id, annotator))
        cands.push_back({{"id", inst.candidates[idx].id}, {"title", inst.candidates[idx].title}});
    json t{{"instance_id", inst.id}, {"abstract", inst.abstract_text}, {"kind", to_string(c.kind)}, {"candidates", cands}};
    if (c.kind == TaskKind::Ranking) t["criteria"] = c.criteria;
    return t;
}

// One row per (judgment, candidate). BestWorst adds best/worst flags,
// Ranking adds criterion and rank, Pairwise adds the choice.
inline std::string export_csv(const Campaign& c, const EffectiveState& state, ExportView view) {
    std::ostringstream out;
    CsvWriter w(out);
    std::vector<std::string> header{"instance_id", "annotator_id", "candidate_id"};
    if (view == ExportView::Analysis) header.push_back("system_tag");
    switch (c.kind) {
    case TaskKind::BestWorst: header.insert(header.end(), {"best", "worst"}); break;
    case TaskKind::Ranking: header.insert(header.end(), {"criterion", "rank"}); break;
    case TaskKind::Pairwise: header.insert(header.end(), {"position", "choice"}); break;
    }
    w.row(header);
    for (const auto& [k, j] : state) {
        const auto* inst = c.find_instance(k.instance_id);
        if (!inst) continue;
        for (std::size_t pos = 0; pos < inst->candidates.size(); ++pos) {
            const auto& cand = inst->candidates[pos];
            std::vector<std::string> row{k.instance_id, k.annotator_id, cand.id};
            if (view == ExportView::Analysis) row.push_back(cand.system_tag);
            if (const auto* s = std::get_if<BwsSelection>(&j)) {
                row.push_back(s->best.contains(cand.id) ? "1" : "0");
                row.push_back(s->worst.contains(cand.id) ? "1" : "0");
            } else if (const auto* r = std::get_if<RankAnnotation>(&j)) {
                row.push_back(r->criterion);
                row.push_back(std::to_string(r->rank_of.at(cand.id)));
            } else if (const auto* p = std::get_if<PairChoice>(&j)) {
                row.push_back(std::to_string(pos + 1));
                row.push_back(std::string(to_string(p->choice)));
            }
            w.row(row);
        }
    }
    return out.str();
}

// Inverse of export_csv for either view.
inline EffectiveState state_from_export(const Campaign& c, std::string_view csv) {
    const auto t = parse_csv(csv);
    EffectiveState state;
    if (t.header.empty()) return state;
    const auto ci = t.column("instance_id"), ca = t.column("annotator_id"), cc = t.column("candidate_id");
    for (const auto& row : t.rows) {
        JudgmentKey key{row[ci], row[ca], {}};
        switch (c.kind) {
        case TaskKind::BestWorst: {
            auto [it, fresh] = state.try_emplace(key, BwsSelection{row[ci], row[ca], {}, {}, 0});
            auto& s = std::get<BwsSelection>(it->second);
            if (row[t.column("best")] == "1") s.best.insert(row[cc]);
            if (row[t.column("worst")] == "1") s.worst.insert(row[cc]);
            break;
        }
        case TaskKind::Ranking: {
            key.criterion = row[t.column("criterion")];
            auto [it, fresh] = state.try_emplace(key, RankAnnotation{row[ci], row[ca], key.criterion, {}, 0});
            std::get<RankAnnotation>(it->second).rank_of[row[cc]] =
                static_cast<int>(parse_int(row[t.column("rank")], "rank"));
            break;
        }
        case TaskKind::Pairwise:
            state.insert_or_assign(key, PairChoice{row[ci], row[ca], parse_outcome(row[t.column("choice")]), 0});
            break;
        }
    }
    return state;
}

} // namespace a2t::annotation

#endif // A2T_ANNOTATION_HPP
