// Copyright 2026 The bioeval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "bioeval/evaluator.hpp"
#include "bioeval/report.hpp"
#include "oracles.hpp"

using namespace bioeval;

namespace {

std::vector<Distance> dists(std::initializer_list<double> v) {
    std::vector<Distance> out;
    for (double x : v) out.emplace_back(x);
    return out;
}

LabeledScores scores(std::vector<Distance> g, std::vector<Distance> i) { return {std::move(g), std::move(i), 0}; }

LabeledScores perfect() { return scores(dists({0.1, 0.1, 0.1}), dists({0.9, 0.9, 0.9, 0.9})); }

LabeledScores gaussian(std::size_t n, double gap, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0), i(gap, 1.0);
    LabeledScores ls;
    // shift so every distance is non-negative; ROC is translation invariant
    for (std::size_t k = 0; k < n; ++k) ls.genuine.emplace_back(std::max(0.0, 10.0 + g(rng)));
    for (std::size_t k = 0; k < n; ++k) ls.impostor.emplace_back(std::max(0.0, 10.0 + i(rng)));
    return ls;
}

RankList ranked(std::string probe_subject, std::string session, std::vector<std::string> order) {
    RankList rl;
    rl.probe = {std::move(probe_subject), std::move(session), "x"};
    double d = 0.0;
    for (auto& s : order) rl.entries.push_back({std::move(s), Distance(d += 0.1)});
    return rl;
}

} // namespace

TEST(RocCurve, PerfectSeparation) {
    const auto rc = roc_curve(perfect());
    EXPECT_TRUE(std::any_of(rc.points.begin(), rc.points.end(),
                            [](const RocPoint& p) { return p.far == 0.0 && p.tar == 1.0; }));
    EXPECT_EQ(rc.points.front().far, 0.0);
    EXPECT_EQ(rc.points.front().tar, 0.0);
    EXPECT_EQ(rc.points.back().far, 1.0);
    EXPECT_EQ(rc.points.back().tar, 1.0);
    EXPECT_EQ(rc.genuine_count, 3u);
    EXPECT_EQ(rc.impostor_count, 4u);
}

TEST(RocCurve, IdenticalListsLieOnDiagonal) {
    const auto v = dists({0.3, 0.1, 0.7, 0.7, 0.2});
    for (const auto& p : roc_curve(scores(v, v)).points) EXPECT_EQ(p.far, p.tar);
}

TEST(RocCurve, InfiniteDistancesOnlyAcceptedAtTop) {
    auto ls = scores(dists({0.1}), {Distance(0.5), Distance::infinite()});
    const auto rc = roc_curve(ls);
    ASSERT_EQ(rc.points.size(), 4u);
    EXPECT_EQ(rc.points[2].far, 0.5); // threshold 0.5 accepts the finite impostor only
    EXPECT_EQ(rc.points[3].far, 1.0);
}

TEST(RocCurve, EmptyListsRejected) {
    EXPECT_THROW(roc_curve(scores({}, dists({1}))), EvalError);
    EXPECT_THROW(roc_curve(scores(dists({1}), {})), EvalError);
}

TEST(RocCurve, MatchesBruteForceSweep) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> coarse(0, 40);
    std::uniform_real_distribution<double> fine(0.0, 2.0);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t ng = 1 + rng() % 100, ni = 1 + rng() % 100;
        auto draw = [&] {
            if (rng() % 20 == 0) return Distance::infinite();
            return trial % 2 ? Distance(coarse(rng) * 0.05) : Distance(fine(rng));
        };
        LabeledScores ls;
        for (std::size_t k = 0; k < ng; ++k) ls.genuine.push_back(draw());
        for (std::size_t k = 0; k < ni; ++k) ls.impostor.push_back(draw());
        EXPECT_EQ(roc_curve(ls).points, oracle::roc_sweep(ls.genuine, ls.impostor));
    }
}

TEST(TarAtFar, PerfectSeparation) { EXPECT_EQ(tar_at_far(roc_curve(perfect()), 0.01), 1.0); }

TEST(TarAtFar, StepConvention) {
    // impostors 0.1..1.0, genuine {0.05, 0.15}. The largest threshold with FAR <= 0.10
    // is 0.15 (one impostor accepted), where both genuine scores are accepted.
    const auto ls = scores(dists({0.05, 0.15}), dists({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}));
    const auto rc = roc_curve(ls);
    EXPECT_EQ(threshold_at_far(rc, 0.10), 0.15);
    EXPECT_EQ(tar_at_far(rc, 0.10), 1.0);
    // At the impostor score itself only half of the genuine pairs pass.
    EXPECT_EQ(acceptance_rate(ls.genuine, 0.1), 0.5);
    // 0.001 < 1/10: only zero-FAR thresholds qualify; the largest is 0.05.
    EXPECT_EQ(threshold_at_far(rc, 0.001), 0.05);
    EXPECT_EQ(tar_at_far(rc, 0.001), 0.5);
}

TEST(TarAtFar, ZeroWhenNothingQualifies) {
    const auto rc = roc_curve(scores(dists({0.5}), dists({0.1, 0.1})));
    EXPECT_EQ(tar_at_far(rc, 0.4), 0.0);
    EXPECT_TRUE(std::isinf(threshold_at_far(rc, 0.4)));
}

TEST(TarAtFar, TargetOutOfRange) {
    const auto rc = roc_curve(perfect());
    EXPECT_THROW(tar_at_far(rc, 0.0), EvalError);
    EXPECT_THROW(tar_at_far(rc, 1.0), EvalError);
}

TEST(TarAtFar, NonDecreasingInTarget) {
    const auto rc = roc_curve(gaussian(2000, 1.0, 3));
    double prev = 0.0;
    for (double t = 0.0005; t < 1.0; t += 0.0123) {
        const double v = tar_at_far(rc, t);
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(Eer, Perfect) { EXPECT_EQ(eer(roc_curve(perfect())), 0.0); }

TEST(Eer, Chance) {
    const auto ls = gaussian(20000, 0.0, 5);
    const auto rc = roc_curve(ls);
    EXPECT_NEAR(eer(rc), 0.5, 3.0 / std::sqrt(20000.0));
    EXPECT_NEAR(auc(rc), 0.5, 3.0 / std::sqrt(20000.0));
}

TEST(Eer, InterpolatesBetweenBracketingPoints) {
    // points: (-inf 0,0) (0.1 0,0.5) (0.2 0.5,0.5) (0.3 0.5,1) (0.4 1,1) (inf 1,1)
    // FAR-FRR: -1, -0.5, 0, ... exact crossing at FAR 0.5
    const auto rc = roc_curve(scores(dists({0.1, 0.3}), dists({0.2, 0.4})));
    EXPECT_EQ(eer(rc), 0.5);
    // genuine {0.1, 0.3, 0.4, 0.5}, impostor {0.2}: FAR-FRR is -0.75 at t=0.1 (FAR 0)
    // and +0.25 at t=0.2 (FAR 1); the crossing is 3/4 of the way, FAR = FRR = 0.75
    EXPECT_DOUBLE_EQ(eer(roc_curve(scores(dists({0.1, 0.3, 0.4, 0.5}), dists({0.2})))), 0.75);
}

TEST(Eer, GaussianClosedForm) {
    const auto rc = roc_curve(gaussian(50000, 2.0, 42));
    EXPECT_NEAR(eer(rc), oracle::normal_cdf(-1.0), 0.005);
    EXPECT_NEAR(auc(rc), oracle::normal_cdf(2.0 / std::sqrt(2.0)), 0.005);
}

TEST(Eer, WithinHalfForSeparatedScores) {
    for (std::uint64_t seed = 1; seed < 20; ++seed) {
        const double e = eer(roc_curve(gaussian(300, 0.1 * seed, seed)));
        EXPECT_GE(e, 0.0);
        EXPECT_LE(e, 0.5);
    }
}

TEST(Auc, PerfectAndTies) {
    EXPECT_EQ(auc(roc_curve(perfect())), 1.0);
    const auto v = dists({0.2, 0.2});
    EXPECT_EQ(auc(roc_curve(scores(v, v))), 0.5);
}

TEST(Cmc, HandFixture) {
    std::vector<RankList> ranks{ranked("A", "1", {"A", "B", "C"}), ranked("B", "1", {"A", "B", "C"}),
                                ranked("C", "1", {"B", "C", "A"})};
    const auto cmc = cmc_curve(ranks, truth_from_probes(ranks));
    ASSERT_EQ(cmc.rates.size(), 3u);
    EXPECT_DOUBLE_EQ(cmc.rates[0], 1.0 / 3.0);
    EXPECT_EQ(cmc.rates[1], 1.0);
    EXPECT_EQ(cmc.rates[2], 1.0);
    EXPECT_EQ(cmc.rate_at(10), 1.0);
}

TEST(Cmc, AllCorrectAndMissingTruth) {
    std::vector<RankList> ranks{ranked("A", "1", {"A", "B"}), ranked("B", "1", {"B", "A"})};
    EXPECT_EQ(cmc_curve(ranks, truth_from_probes(ranks)).rates[0], 1.0);
    TruthMap partial{{ranks[0].probe, "A"}};
    EXPECT_THROW(cmc_curve(ranks, partial), EvalError);
}

TEST(Cmc, MonotoneOnRandomRankings) {
    std::mt19937_64 rng(8);
    std::vector<std::string> roster{"a", "b", "c", "d", "e", "f"};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<RankList> ranks;
        for (int p = 0; p < 1 + trial % 9; ++p) {
            auto order = roster;
            std::shuffle(order.begin(), order.end(), rng);
            ranks.push_back(ranked(roster[rng() % roster.size()], std::to_string(p), order));
        }
        const auto cmc = cmc_curve(ranks, truth_from_probes(ranks));
        EXPECT_TRUE(std::is_sorted(cmc.rates.begin(), cmc.rates.end()));
        EXPECT_EQ(cmc.rates.back(), 1.0);
    }
}

TEST(IdentificationScores, HandEnumeration) {
    TemplateSet ts = TemplateSet::create({
        {"A", "S1", "real", Layer::score, {0.6, 0.3, 0.1}},
        {"C", "S1", "real", Layer::score, {0.5, 0.25, 0.25}},
    });
    const auto ranks = rank_from_class_scores(ts, {"A", "B", "C"});
    const auto ls = identification_scores(ts, {"A", "B", "C"}, truth_from_probes(ranks));
    // probe A: genuine 1-0.6; impostors 1-0.3, 1-0.1
    // probe C: genuine 1-0.25; impostors 1-0.5, 1-0.25(B)
    std::vector<double> g, i;
    for (auto d : ls.genuine) g.push_back(d.value());
    for (auto d : ls.impostor) i.push_back(d.value());
    std::sort(g.begin(), g.end());
    std::sort(i.begin(), i.end());
    EXPECT_EQ(g, (std::vector<double>{1 - 0.6, 1 - 0.25}));
    EXPECT_EQ(i, (std::vector<double>{1 - 0.5, 1 - 0.3, 1 - 0.25, 1 - 0.1}));
}

TEST(IdentificationScores, OneHotIsPerfect) {
    std::vector<FeatureTemplate> v;
    const std::vector<std::string> roster{"A", "B", "C", "D"};
    for (std::size_t s = 0; s < 4; ++s) {
        std::vector<double> f(4, 0.0);
        f[s] = 1.0;
        v.push_back({roster[s], "S1", "real", Layer::score, f});
    }
    const auto ts = TemplateSet::create(v);
    const auto ranks = rank_from_class_scores(ts, roster);
    const auto rc = roc_curve(identification_scores(ranks, truth_from_probes(ranks)));
    EXPECT_EQ(tar_at_far(rc, 0.01), 1.0);
}

TEST(IdentificationScores, UniformScoresAreChance) {
    std::vector<FeatureTemplate> v;
    const std::vector<std::string> roster{"A", "B", "C", "D"};
    for (std::size_t s = 0; s < 4; ++s) v.push_back({roster[s], "S1", "real", Layer::score, {0.25, 0.25, 0.25, 0.25}});
    const auto ts = TemplateSet::create(v);
    const auto ranks = rank_from_class_scores(ts, roster);
    const auto rc = roc_curve(identification_scores(ranks, truth_from_probes(ranks)));
    EXPECT_EQ(auc(rc), 0.5);
    EXPECT_EQ(eer(rc), 0.5);
}

TEST(IdentificationScores, TruthOutsideRoster) {
    std::vector<RankList> ranks{ranked("Z", "1", {"A", "B"})};
    EXPECT_THROW(identification_scores(ranks, truth_from_probes(ranks)), EvalError);
}

TEST(AggregateFolds, Examples) {
    auto report = [](int id, double tar) {
        EvalReport r;
        r.fold_id = id;
        r.tar_at_far[0.01] = tar;
        return r;
    };
    auto s = aggregate_folds({report(1, 0.10), report(2, 0.20)});
    EXPECT_EQ(format_mean_std(s.quantities[0].mean, s.quantities[0].stddev), "15.00 ± 7.07");
    auto flat = aggregate_folds({report(1, 0.4), report(2, 0.4), report(3, 0.4), report(4, 0.4)});
    EXPECT_EQ(format_mean_std(flat.quantities[0].mean, flat.quantities[0].stddev), "40.00 ± 0.00");
    EXPECT_EQ(flat.fold_count, 4u);
    EXPECT_EQ(flat.quantities[0].key, "tar_at_far_0.01");
    EXPECT_EQ(flat.quantities[0].label, "TAR@1%FAR");
}

TEST(AggregateFolds, Errors) {
    EvalReport a, b;
    a.eer = 0.1;
    b.auc = 0.9;
    EXPECT_THROW(aggregate_folds({a}), EvalError);
    EXPECT_THROW(aggregate_folds({a, b}), EvalError);
}

TEST(AggregateFolds, PermutationInvariantMean) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<EvalReport> reports(2 + trial % 5);
        for (std::size_t k = 0; k < reports.size(); ++k) {
            reports[k].fold_id = static_cast<int>(k);
            reports[k].eer = u(rng);
            reports[k].rank_k[1] = u(rng);
        }
        const auto base = aggregate_folds(reports);
        std::shuffle(reports.begin(), reports.end(), rng);
        const auto shuffled = aggregate_folds(reports);
        for (std::size_t q = 0; q < base.quantities.size(); ++q) {
            EXPECT_EQ(base.quantities[q].mean, shuffled.quantities[q].mean);
            EXPECT_GE(base.quantities[q].stddev, 0.0);
            EXPECT_GE(base.quantities[q].mean, base.quantities[q].min);
            EXPECT_LE(base.quantities[q].mean, base.quantities[q].max);
        }
    }
}

TEST(AggregateFolds, TableRowLayout) {
    std::vector<EvalReport> folds(4);
    const double tar1[] = {0.40, 0.45, 0.43, 0.48}, tar01[] = {0.2, 0.22, 0.19, 0.21}, r1[] = {0.35, 0.36, 0.33, 0.37};
    for (int k = 0; k < 4; ++k) {
        folds[k].fold_id = k + 1;
        folds[k].tar_at_far[0.01] = tar1[k];
        folds[k].tar_at_far[0.001] = tar01[k];
        folds[k].rank_k[1] = r1[k];
    }
    const auto s = aggregate_folds(folds);
    EXPECT_EQ(s.header("Models"), "Models | TAR@1%FAR | TAR@0.1%FAR | Rank-1");
    EXPECT_EQ(s.row("Xception"), "Xception | 44.00 ± 3.37 | 20.50 ± 1.29 | 35.25 ± 1.71");
}

TEST(Report, CurveCsv) {
    const auto rc = roc_curve(perfect());
    EXPECT_EQ(roc_to_csv(rc), "threshold,far,tar\n-inf,0,0\n0.1,0,1\n0.9,1,1\ninf,1,1\n");
    CmcCurve cmc{{0.5, 1.0}};
    EXPECT_EQ(cmc_to_csv(cmc), "rank,rate\n1,0.5\n2,1\n");
}
