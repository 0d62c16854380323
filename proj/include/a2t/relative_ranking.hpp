#ifndef A2T_RELATIVE_RANKING_HPP
#define A2T_RELATIVE_RANKING_HPP

#include <a2t/error.hpp>
#include <a2t/io.hpp>

#include <string>
#include <vector>

namespace a2t {

// One (better, worse) title pair for an abstract, derived from unequal BWS.
struct RelativeRankingJudgment {
    std::string abstract_id;
    std::string better_candidate_id;
    std::string worse_candidate_id;
    double score_diff = 0.0;  // BWS(better) - BWS(worse), > 0

    friend bool operator==(const RelativeRankingJudgment&, const RelativeRankingJudgment&) = default;
};

inline json to_json(const RelativeRankingJudgment& j) {
    return json{{"abstract_id", j.abstract_id},
                {"better", j.better_candidate_id},
                {"worse", j.worse_candidate_id},
                {"score_diff", j.score_diff}};
}

inline std::string rr_to_jsonl(const std::vector<RelativeRankingJudgment>& js) {
    std::string out;
    for (const auto& j : js) {
        out += to_json(j).dump();
        out += '\n';
    }
    return out;
}

inline std::vector<RelativeRankingJudgment> rr_from_jsonl(std::string_view text) {
    std::vector<RelativeRankingJudgment> out;
    for_each_jsonl(text, [&](const json& o, std::size_t line) {
        RelativeRankingJudgment j;
        j.abstract_id = field_as<std::string>(o, "abstract_id", line);
        j.better_candidate_id = field_as<std::string>(o, "better", line);
        j.worse_candidate_id = field_as<std::string>(o, "worse", line);
        j.score_diff = field_as<double>(o, "score_diff", line);
        if (!(j.score_diff > 0.0))
            fail_data("non_positive_score_diff",
                      "line " + std::to_string(line) + ": score_diff must be positive");
        out.push_back(std::move(j));
    });
    return out;
}

} // namespace a2t

#endif // A2T_RELATIVE_RANKING_HPP
