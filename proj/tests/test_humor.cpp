#include <a2t/humor.hpp>

#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace a2t;
using namespace a2t::humor;

namespace {

LabelMatrix column_matrix(const std::vector<std::vector<int>>& columns) {
    LabelMatrix m;
    const auto k = columns.front().size();
    for (std::size_t r = 0; r < k; ++r) m.classifier_ids.push_back("clf" + std::to_string(r));
    m.labels.assign(k, {});
    for (std::size_t c = 0; c < columns.size(); ++c) {
        m.title_ids.push_back("t" + std::to_string(c));
        for (std::size_t r = 0; r < k; ++r) m.labels[r].push_back(columns[c][r]);
    }
    return m;
}

std::vector<int> column_of(const LabelMatrix& m, std::size_t c) {
    std::vector<int> out;
    for (const auto& row : m.labels) out.push_back(row[c]);
    return out;
}

LabelMatrix random_matrix(Rng& rng, std::size_t k, std::size_t n) {
    LabelMatrix m;
    for (std::size_t r = 0; r < k; ++r) m.classifier_ids.push_back("clf" + std::to_string(r));
    for (std::size_t c = 0; c < n; ++c) m.title_ids.push_back("t" + std::to_string(c));
    // skewed toward 0 like real humor labels, with some columns near unanimous
    for (std::size_t r = 0; r < k; ++r) {
        std::vector<int> row;
        for (std::size_t c = 0; c < n; ++c) {
            const double u = rng.uniform(0.0, 1.0);
            row.push_back(u < 0.55 ? 0 : (u < 0.8 ? 1 : 2));
        }
        m.labels.push_back(std::move(row));
    }
    return m;
}

std::vector<int> random_labels(Rng& rng, std::size_t n) {
    std::vector<int> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<int>(rng.below(3)));
    return out;
}

// Columns whose label sums cover 0..2K once each.
LabelMatrix every_sum_matrix(std::size_t k) {
    std::vector<std::vector<int>> cols;
    for (std::size_t s = 0; s <= 2 * k; ++s) {
        std::vector<int> col(k, 0);
        for (std::size_t r = 0; r < s / 2; ++r) col[r] = 2;
        if (s % 2) col[s / 2] = 1;
        cols.push_back(col);
    }
    return column_matrix(cols);
}

} // namespace

TEST(Merge, TakesTheMaximum) {
    EXPECT_EQ(merge_annotations(0, 1), 1);
    EXPECT_EQ(merge_annotations(2, 2), 2);
    EXPECT_EQ(merge_annotations(0, 0), 0);
    EXPECT_EQ(merge_annotations(2, 0), 2);
    EXPECT_THROW(merge_annotations(3, 0), Error);
}

TEST(EnsMv, WorkedExamples) {
    const std::vector<int> zeros(11, 0);
    const std::vector<int> six_three_two{0, 0, 0, 0, 0, 0, 1, 1, 1, 2, 2};
    const std::vector<int> five_three_three{0, 0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
    const std::vector<int> five_two_four{0, 0, 0, 0, 0, 1, 1, 2, 2, 2, 2};
    EXPECT_EQ(ens_mv(column_matrix({zeros, six_three_two, five_three_three, five_two_four})),
              (std::vector<int>{0, 0, 1, 2}));
}

TEST(EnsMv, EvenKWarns) {
    std::vector<std::string> warnings;
    ens_mv(column_matrix({{0, 0, 1, 1}}), &warnings);
    EXPECT_EQ(warnings.size(), 1u);
    warnings.clear();
    ens_mv(column_matrix({{0, 0, 1}}), &warnings);
    EXPECT_TRUE(warnings.empty());
    // K = 4: two zeros are not a strict majority
    EXPECT_EQ(ens_mv(column_matrix({{0, 0, 1, 1}})).front(), 1);
    EXPECT_EQ(ens_mv(column_matrix({{0, 0, 0, 1}})).front(), 0);
}

TEST(EnsSum, WorkedExamples) {
    std::vector<int> sum16(11, 0), sum10(11, 0), sum15(11, 0), sum7(11, 0), sum6(11, 0);
    for (int r = 0; r < 8; ++r) sum16[static_cast<std::size_t>(r)] = 2;
    for (int r = 0; r < 5; ++r) sum10[static_cast<std::size_t>(r)] = 2;
    for (int r = 0; r < 7; ++r) sum15[static_cast<std::size_t>(r)] = 2;
    sum15[7] = 1;
    for (int r = 0; r < 7; ++r) sum7[static_cast<std::size_t>(r)] = 1;
    for (int r = 0; r < 6; ++r) sum6[static_cast<std::size_t>(r)] = 1;
    const auto m = column_matrix({std::vector<int>(11, 0), sum16, sum10, sum15, sum7, sum6});
    EXPECT_EQ(ens_sum(m, 7, 16), (std::vector<int>{0, 2, 1, 1, 1, 0}));
    EXPECT_THROW(ens_sum(m, 16, 7), Error);
    EXPECT_THROW(ens_sum(m, 0, 23), Error);
}

TEST(Ensembles, AgreeWithRuleOracleOnRandomMatrices) {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = random_matrix(rng, 11, 50);
        const auto mv = ens_mv(m);
        const int i = static_cast<int>(rng.below(22));
        const int j = i + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(22 - i)));
        const auto sum = ens_sum(m, i, j);
        for (std::size_t c = 0; c < m.n(); ++c) {
            ASSERT_EQ(mv[c], oracle::ens_mv_rule(column_of(m, c))) << "trial " << trial << " col " << c;
            ASSERT_EQ(sum[c], oracle::ens_sum_rule(column_of(m, c), i, j)) << "trial " << trial << " col " << c;
        }
    }
}

TEST(Ensembles, SumIsMonotoneAndMvIgnoresClassifierOrder) {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        auto m = random_matrix(rng, 11, 20);
        const int i = 1 + static_cast<int>(rng.below(10));
        const int j = i + 1 + static_cast<int>(rng.below(10));
        const auto before = ens_sum(m, i, j);
        const auto r = rng.below(11), c = rng.below(20);
        if (m.labels[r][c] < 2) ++m.labels[r][c];
        const auto after = ens_sum(m, i, j);
        for (std::size_t x = 0; x < before.size(); ++x) ASSERT_GE(after[x], before[x]);

        auto shuffled = m;
        rng.shuffle(shuffled.labels);
        ASSERT_EQ(ens_mv(shuffled), ens_mv(m));
    }
}

TEST(MacroF1, HandComputedConfusion) {
    // gold: 4x0, 3x1, 3x2
    const std::vector<int> gold{0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
    const std::vector<int> pred{0, 0, 0, 1, 1, 1, 2, 2, 2, 0};
    // class 0: tp 3 fp 1 fn 1 -> 6/8; class 1: tp 2 fp 1 fn 1 -> 4/6; class 2: tp 2 fp 1 fn 1 -> 4/6
    EXPECT_NEAR(macro_f1(pred, gold), (0.75 + 2.0 / 3 + 2.0 / 3) / 3, 1e-15);
    // binary: not funny tp 3 fp 1 fn 1 -> 0.75; funny tp 5 fp 1 fn 1 -> 10/12
    EXPECT_NEAR(macro_f1(pred, gold, F1Mode::Binary), (0.75 + 10.0 / 12) / 2, 1e-15);
    EXPECT_EQ(macro_f1(gold, gold), 1.0);
    EXPECT_THROW(macro_f1({}, {}), Error);
    EXPECT_THROW(macro_f1({0}, {0, 1}), Error);
}

TEST(MacroF1, AbsentClassCountsAsZero) {
    EXPECT_NEAR(macro_f1({0, 0, 1}, {0, 0, 1}), 2.0 / 3, 1e-15);
}

TEST(MacroF1, MatchesOracleAndProperties) {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = 1 + rng.below(40);
        const auto gold = random_labels(rng, n);
        auto pred = random_labels(rng, n);
        if (trial % 5 == 0) pred = gold;
        const double f3 = macro_f1(pred, gold);
        ASSERT_NEAR(f3, oracle::macro_f1(pred, gold, 3), 1e-12);
        std::vector<int> pc, gc;
        for (int p : pred) pc.push_back(p == 0 ? 0 : 1);
        for (int g : gold) gc.push_back(g == 0 ? 0 : 1);
        ASSERT_NEAR(macro_f1(pred, gold, F1Mode::Binary), oracle::macro_f1(pc, gc, 2), 1e-12);
        ASSERT_GE(f3, 0.0);
        ASSERT_LE(f3, 1.0);
        const bool all_present = std::set<int>(gold.begin(), gold.end()).size() == 3;
        ASSERT_EQ(f3 == 1.0, pred == gold && all_present);

        // collapsed accuracy equals the collapsed 3x3 confusion diagonal
        double confusion[3][3] = {};
        for (std::size_t i = 0; i < n; ++i) confusion[gold[i]][pred[i]] += 1;
        const double collapsed_diag = confusion[0][0] + confusion[1][1] + confusion[1][2] + confusion[2][1] + confusion[2][2];
        double direct = 0;
        for (std::size_t i = 0; i < n; ++i) direct += pc[i] == gc[i];
        ASSERT_EQ(direct, collapsed_diag);
    }
}

TEST(MacroF1, BinaryBeatsThreeWayUnderImbalance) {
    // Mostly not funny; the classifier separates funny from not funny well
    // but confuses medium with funny, the usual failure mode.
    std::vector<int> gold, pred;
    for (int i = 0; i < 300; ++i) {
        gold.push_back(0);
        pred.push_back(i % 30 == 0 ? 1 : 0);
    }
    for (int i = 0; i < 40; ++i) {
        gold.push_back(1);
        pred.push_back(i % 2 ? 2 : 1);
    }
    for (int i = 0; i < 10; ++i) {
        gold.push_back(2);
        pred.push_back(i % 3 ? 1 : 2);
    }
    const double three = macro_f1(pred, gold), binary = macro_f1(pred, gold, F1Mode::Binary);
    EXPECT_GT(binary, three + 0.2);
}

TEST(Search, RecoversPlantedOptimum) {
    const auto m = every_sum_matrix(11);
    std::vector<int> gold;
    for (int s : label_sums(m)) gold.push_back(sum_to_label(s, 7, 16));
    const auto r = search_thresholds(m, gold);
    EXPECT_EQ(r.i, 7);
    EXPECT_EQ(r.j, 16);
    EXPECT_EQ(r.score, 1.0);
    EXPECT_FALSE(r.degenerate);
    // uniqueness: every other grid point scores lower
    for (int i = 0; i <= 22; ++i)
        for (int j = i + 1; j <= 22; ++j)
            if (i != 7 || j != 16) {
                EXPECT_LT(macro_f1(ens_sum(m, i, j), gold), 1.0);
            }
}

TEST(Search, MatchesBruteForceAtK5) {
    Rng rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = random_matrix(rng, 5, 30);
        const auto gold = random_labels(rng, 30);
        const auto r = search_thresholds(m, gold);
        double best = -1;
        int bi = -1, bj = -1;
        for (int i = 0; i <= 10; ++i) {
            for (int j = i + 1; j <= 10; ++j) {
                std::vector<int> pred;
                for (std::size_t c = 0; c < 30; ++c) pred.push_back(oracle::ens_sum_rule(column_of(m, c), i, j));
                const double f = oracle::macro_f1(pred, gold, 3);
                ASSERT_LE(f, r.score + 1e-12);
                if (f > best + 1e-12) {
                    best = f;
                    bi = i;
                    bj = j;
                }
            }
        }
        ASSERT_NEAR(r.score, best, 1e-12);
        ASSERT_EQ(r.i, bi) << "trial " << trial;
        ASSERT_EQ(r.j, bj) << "trial " << trial;
    }
}

TEST(Search, SingleClassGoldIsDegenerate) {
    Rng rng(3);
    const auto m = random_matrix(rng, 5, 12);
    const auto r = search_thresholds(m, std::vector<int>(12, 0));
    EXPECT_TRUE(r.degenerate);
    EXPECT_FALSE(r.warning.empty());
}

TEST(MatrixIo, RoundTripAndGoldAlignment) {
    Rng rng(8);
    const auto m = random_matrix(rng, 3, 4);
    const auto back = parse_label_matrix_csv(label_matrix_to_csv(m));
    EXPECT_EQ(back.labels, m.labels);
    EXPECT_EQ(back.title_ids, m.title_ids);
    const auto gold = parse_gold_csv("title_id,label\nt3,2\nt0,0\nt1,1\nt2,0\n");
    EXPECT_EQ(align_gold(m, gold), (std::vector<int>{0, 1, 0, 2}));
    EXPECT_THROW(align_gold(m, parse_gold_csv("title_id,label\nt0,0\n")), Error);
    EXPECT_THROW(parse_label_matrix_csv("classifier_id,t0\nc,5\n"), Error);
    EXPECT_THROW(parse_label_matrix_csv("classifier_id,t0,t1\nc,0\n"), Error);
}

namespace {

struct PoolCounts {
    int not_funny, medium, funny;
};

std::vector<LabeledTitle> pool_of(PoolCounts c) {
    std::vector<LabeledTitle> pool;
    int k = 0;
    auto add = [&](int n, int label) {
        for (int i = 0; i < n; ++i) pool.push_back({"title" + std::to_string(k++), label});
    };
    add(c.not_funny, 0);
    add(c.medium, 1);
    add(c.funny, 2);
    return pool;
}

void expect_recount(const std::vector<LabeledTitle>& pool, const std::vector<BalancedSplit>& splits, std::size_t tf,
                    std::size_t tn, std::size_t df, std::size_t dn) {
    std::map<std::string, int> label;
    for (const auto& t : pool) label[t.id] = t.label;
    for (const auto& s : splits) {
        std::size_t f = 0, n = 0;
        for (const auto& id : s.train) (label.at(id) ? f : n)++;
        EXPECT_EQ(f, tf);
        EXPECT_EQ(n, tn);
        f = n = 0;
        for (const auto& id : s.dev) (label.at(id) ? f : n)++;
        EXPECT_EQ(f, df);
        EXPECT_EQ(n, dn);
        std::vector<std::string> both;
        std::set_intersection(s.train.begin(), s.train.end(), s.dev.begin(), s.dev.end(), std::back_inserter(both));
        EXPECT_TRUE(both.empty());
    }
}

} // namespace

TEST(BalancedSplits, StageOneShape) {
    const auto pool = pool_of({1603, 106, 21});
    const auto splits = make_balanced_splits(pool, BalancedSplitSpec::stage1(3));
    ASSERT_EQ(splits.size(), 11u);
    expect_recount(pool, splits, 100, 200, 27, 27);
    EXPECT_NE(splits[0].train, splits[1].train);
    EXPECT_EQ(make_balanced_splits(pool, BalancedSplitSpec::stage1(3))[4].dev, splits[4].dev);
}

TEST(BalancedSplits, StageTwoShape) {
    const auto pool = pool_of({1893, 492, 56});
    const auto splits = make_balanced_splits(pool, BalancedSplitSpec::stage2(9));
    ASSERT_EQ(splits.size(), 11u);
    expect_recount(pool, splits, 400, 800, 148, 148);
}

TEST(BalancedSplits, InfeasibleNamesTheShortfall) {
    try {
        make_balanced_splits(pool_of({150, 90, 20}), BalancedSplitSpec::stage1());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
        EXPECT_NE(std::string(e.what()).find("short by"), std::string::npos);
    }
}

TEST(ControlMetrics, AllCorrectAndDistinct) {
    std::vector<Generation> g;
    for (int i = 0; i < 5; ++i) {
        g.push_back({"a" + std::to_string(i), 0, "plain " + std::to_string(i), 0});
        g.push_back({"a" + std::to_string(i), 1, "funny " + std::to_string(i), 1});
    }
    const auto m = generation_control_metrics(g);
    EXPECT_EQ(m.acc_funny, 1.0);
    EXPECT_EQ(m.acc_not_funny, 1.0);
    EXPECT_EQ(m.ratio_same, 0.0);
    EXPECT_EQ(m.f1_macro, 1.0);
}

TEST(ControlMetrics, RatioSameCountsNormalizedTwins) {
    std::vector<Generation> g;
    for (int i = 0; i < 20; ++i) {
        const auto id = "a" + std::to_string(i);
        g.push_back({id, 0, "Title " + std::to_string(i), 0});
        g.push_back({id, 1, i < 3 ? "  Title   " + std::to_string(i) + " " : "Other " + std::to_string(i), 1});
    }
    g.push_back({"lonely", 1, "only funny", 1});
    const auto m = generation_control_metrics(g);
    EXPECT_DOUBLE_EQ(m.ratio_same, 0.15);
    EXPECT_EQ(m.abstracts_compared, 20u);
    ASSERT_EQ(m.missing_variant.size(), 1u);
    EXPECT_EQ(m.missing_variant.front(), "lonely");
    EXPECT_NE(control_report(m).find("left out of Ratio_SAME"), std::string::npos);
}

TEST(ControlMetrics, PublishedReportShape) {
    const auto gens = parse_generations_csv(read_file(a2t::testing::fixture("control_metrics_published.csv")));
    ASSERT_EQ(gens.size(), 594u);
    const auto m = generation_control_metrics(gens);
    EXPECT_EQ(fixed(m.f1_macro, 3), "0.856");
    EXPECT_EQ(percent(m.acc_not_funny), "93.6%");
    EXPECT_EQ(percent(m.acc_funny), "77.8%");
    EXPECT_EQ(percent(m.ratio_same), "4.7%");
    const auto report = control_report(m, "BART_xsum+pseudo");
    EXPECT_NE(report.find("0.856"), std::string::npos);
    EXPECT_EQ(report, control_report(generation_control_metrics(gens), "BART_xsum+pseudo"));
}

TEST(Baseline, SeparatesPlantedClusters) {
    Rng rng(17);
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    const double centers[3][2] = {{-2, 0}, {2, 0}, {0, 3}};
    for (int i = 0; i < 150; ++i) {
        const int y = i % 3;
        xs.push_back({centers[y][0] + 0.3 * rng.normal(), centers[y][1] + 0.3 * rng.normal()});
        ys.push_back(y);
    }
    const auto clf = train_baseline(xs, ys);
    int right = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) right += clf.predict(xs[i]) == ys[i];
    EXPECT_GE(right, 145);
}
