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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bioeval/format.hpp"
#include "bioeval/matcher.hpp"
#include "bioeval/metrics.hpp"
#include "bioeval/templates.hpp"

namespace bioeval {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operating point: accept a pair iff its distance <= threshold.
struct RocPoint {
    double threshold = 0.0;
    double far = 0.0;
    double tar = 0.0;

    bool operator==(const RocPoint&) const = default;
};

/// Points sorted by ascending threshold, so FAR and TAR are both non-decreasing.
/// The first point (threshold -inf) accepts nothing; the last (threshold +inf)
/// accepts everything including infinite distances. Between them, one point per
/// distinct finite score.
struct RocCurve {
    std::vector<RocPoint> points;
    std::size_t genuine_count = 0;
    std::size_t impostor_count = 0;
};

namespace detail {

inline std::vector<double> finite_sorted(const std::vector<Distance>& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& d : v)
        if (d.is_finite()) out.push_back(d.value());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace detail

inline RocCurve roc_curve(const LabeledScores& ls) {
    if (ls.genuine.empty()) throw EvalError("roc_curve: no genuine scores");
    if (ls.impostor.empty()) throw EvalError("roc_curve: no impostor scores");

    const auto gen = detail::finite_sorted(ls.genuine);
    const auto imp = detail::finite_sorted(ls.impostor);
    std::vector<double> thresholds;
    thresholds.reserve(gen.size() + imp.size());
    std::merge(gen.begin(), gen.end(), imp.begin(), imp.end(), std::back_inserter(thresholds));
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    RocCurve rc;
    rc.genuine_count = ls.genuine.size();
    rc.impostor_count = ls.impostor.size();
    const double ng = static_cast<double>(rc.genuine_count);
    const double ni = static_cast<double>(rc.impostor_count);
    constexpr double inf = std::numeric_limits<double>::infinity();

    rc.points.reserve(thresholds.size() + 2);
    rc.points.push_back({-inf, 0.0, 0.0});
    std::size_t gi = 0, ii = 0;
    for (double t : thresholds) {
        while (gi < gen.size() && gen[gi] <= t) ++gi;
        while (ii < imp.size() && imp[ii] <= t) ++ii;
        rc.points.push_back({t, static_cast<double>(ii) / ni, static_cast<double>(gi) / ng});
    }
    rc.points.push_back({inf, 1.0, 1.0});
    return rc;
}

namespace detail {

/// Index of the last (largest-threshold) point whose FAR <= target.
inline std::size_t last_point_within(const RocCurve& rc, double target) {
    if (rc.points.empty()) throw EvalError("empty ROC curve");
    auto it = std::upper_bound(rc.points.begin(), rc.points.end(), target,
                               [](double t, const RocPoint& p) { return t < p.far; });
    // The first point always has FAR 0, so `it` is past it for any target >= 0.
    return it == rc.points.begin() ? 0 : static_cast<std::size_t>(it - rc.points.begin()) - 1;
}

inline void check_target(double target) {
    if (!(target > 0.0 && target < 1.0)) throw EvalError("FAR target must lie in (0, 1)");
}

} // namespace detail

/// TAR at the largest threshold whose empirical FAR <= target (no interpolation).
/// When only the reject-all point qualifies, the result is 0.
inline double tar_at_far(const RocCurve& rc, double target) {
    detail::check_target(target);
    return rc.points[detail::last_point_within(rc, target)].tar;
}

/// Threshold used by tar_at_far; -inf when only the reject-all point qualifies.
inline double threshold_at_far(const RocCurve& rc, double target) {
    detail::check_target(target);
    return rc.points[detail::last_point_within(rc, target)].threshold;
}

/// Fraction of `scores` accepted (distance <= threshold). Infinite distances are
/// accepted only by threshold +inf.
inline double acceptance_rate(const std::vector<Distance>& scores, double threshold) {
    if (scores.empty()) throw EvalError("acceptance_rate: empty score list");
    std::size_t n = 0;
    for (const auto& d : scores) {
        if (d.is_infinite() ? threshold == std::numeric_limits<double>::infinity() : d.value() <= threshold) ++n;
    }
    return static_cast<double>(n) / static_cast<double>(scores.size());
}

/// Rate where FAR = FRR (FRR = 1 - TAR), linearly interpolated between the two
/// operating points that bracket the sign change of FAR - FRR.
inline double eer(const RocCurve& rc) {
    if (rc.points.size() < 2) throw EvalError("eer: ROC curve needs at least two points");
    auto diff = [](const RocPoint& p) { return p.far - (1.0 - p.tar); };
    for (std::size_t i = 0; i < rc.points.size(); ++i) {
        const double d1 = diff(rc.points[i]);
        if (d1 == 0.0) return rc.points[i].far;
        if (d1 > 0.0) {
            if (i == 0) return rc.points[0].far;
            const auto& a = rc.points[i - 1];
            const auto& b = rc.points[i];
            const double d0 = diff(a);
            const double t = -d0 / (d1 - d0);
            return a.far + t * (b.far - a.far);
        }
    }
    // Unreachable for curves built by roc_curve: the last point has FAR 1, FRR 0.
    return rc.points.back().far;
}

/// Trapezoidal area under TAR(FAR) over [0, 1].
inline double auc(const RocCurve& rc) {
    double area = 0.0;
    for (std::size_t i = 1; i < rc.points.size(); ++i) {
        const auto& a = rc.points[i - 1];
        const auto& b = rc.points[i];
        area += (b.far - a.far) * (a.tar + b.tar) * 0.5;
    }
    return area;
}

/// Identification rate at rank 1..R.
struct CmcCurve {
    std::vector<double> rates;

    /// Rate at 1-based rank k; ranks beyond R saturate at R.
    double rate_at(std::size_t k) const {
        if (rates.empty() || k == 0) throw EvalError("cmc: invalid rank");
        return rates[std::min(k, rates.size()) - 1];
    }
};

using TruthMap = std::map<TemplateKey, std::string>;

/// Ground truth where each probe's identity is its own subject label.
inline TruthMap truth_from_probes(const std::vector<RankList>& ranks) {
    TruthMap truth;
    for (const auto& rl : ranks) truth[rl.probe] = rl.probe.subject;
    return truth;
}

inline CmcCurve cmc_curve(const std::vector<RankList>& ranks, const TruthMap& truth) {
    if (ranks.empty()) throw EvalError("cmc_curve: no probes");
    const std::size_t roster = ranks.front().entries.size();
    if (roster == 0) throw EvalError("cmc_curve: empty rank list");
    std::vector<std::size_t> hits_at(roster + 1, 0);
    for (const auto& rl : ranks) {
        if (rl.entries.size() != roster)
            throw EvalError("cmc_curve: rank list of " + to_string(rl.probe) + " does not cover the roster");
        auto it = truth.find(rl.probe);
        if (it == truth.end()) throw EvalError("cmc_curve: no truth label for probe " + to_string(rl.probe));
        if (auto pos = rl.position_of(it->second)) ++hits_at[*pos];
    }
    CmcCurve cmc;
    cmc.rates.reserve(roster);
    std::size_t cumulative = 0;
    const double n = static_cast<double>(ranks.size());
    for (std::size_t k = 1; k <= roster; ++k) {
        cumulative += hits_at[k];
        cmc.rates.push_back(static_cast<double>(cumulative) / n);
    }
    return cmc;
}

/// Identification scores for ROC analysis: genuine is each probe's score for its
/// true subject, impostor is that probe's score for every other subject.
inline LabeledScores identification_scores(const std::vector<RankList>& ranks, const TruthMap& truth) {
    LabeledScores ls;
    for (const auto& rl : ranks) {
        auto it = truth.find(rl.probe);
        if (it == truth.end())
            throw EvalError("identification_scores: no truth label for probe " + to_string(rl.probe));
        if (!rl.position_of(it->second))
            throw EvalError("identification_scores: true subject '" + it->second + "' of probe " +
                            to_string(rl.probe) + " is not in the roster");
        for (const auto& e : rl.entries) (e.subject == it->second ? ls.genuine : ls.impostor).push_back(e.distance);
    }
    return ls;
}

/// Class-score variant; scores are mapped to distances as 1 - score.
inline LabeledScores identification_scores(const TemplateSet& score_templates, const std::vector<std::string>& roster,
                                           const TruthMap& truth) {
    return identification_scores(rank_from_class_scores(score_templates, roster), truth);
}

/// Description of the identification genuine/impostor construction, written into every report.
inline constexpr const char* identification_interpretation =
    "identification TAR@FAR: genuine = each probe's score for its true subject, "
    "impostor = the same probe's scores for all other roster subjects; class scores s enter as distance 1 - s";

/// One named scalar of a report, as a fraction.
struct Quantity {
    std::string key;   // stable machine name, e.g. "tar_at_far_0.01"
    std::string label; // table header, e.g. "TAR@1%FAR"
    double value = 0.0;
};

struct EvalReport {
    int fold_id = 0;
    std::map<double, double, std::greater<>> tar_at_far; // target FAR -> TAR, strictest target last
    std::optional<double> eer;
    std::optional<double> auc;
    std::map<std::size_t, double> rank_k;

    /// Flattened in table order: TAR@targets (descending), EER, AUC, Rank-k.
    std::vector<Quantity> quantities() const {
        std::vector<Quantity> q;
        for (const auto& [target, tar] : tar_at_far)
            q.push_back({"tar_at_far_" + format_double(target),
                         "TAR@" + format_double(target * 100.0) + "%FAR", tar});
        if (eer) q.push_back({"eer", "EER", *eer});
        if (auc) q.push_back({"auc", "AUC", *auc});
        for (const auto& [k, rate] : rank_k) q.push_back({"rank_" + std::to_string(k), "Rank-" + std::to_string(k), rate});
        return q;
    }
};

/// Mean and sample standard deviation (n - 1) of one quantity across folds.
struct QuantitySummary {
    std::string key;
    std::string label;
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// "mean ± std" in percent with two decimals, e.g. "15.00 ± 7.07" for fractions (0.10, 0.20).
inline std::string format_mean_std(double mean, double stddev) {
    return format_fixed(mean * 100.0, 2) + " ± " + format_fixed(stddev * 100.0, 2);
}

struct CrossValSummary {
    std::size_t fold_count = 0;
    std::vector<QuantitySummary> quantities;

    const QuantitySummary& at(std::string_view key) const {
        for (const auto& q : quantities)
            if (q.key == key) return q;
        throw EvalError("summary has no quantity '" + std::string(key) + "'");
    }

    /// Table row: `name | m ± s | m ± s | ...` in quantity order.
    std::string row(std::string_view name) const {
        std::string out(name);
        for (const auto& q : quantities) out += " | " + format_mean_std(q.mean, q.stddev);
        return out;
    }

    std::string header(std::string_view first_column) const {
        std::string out(first_column);
        for (const auto& q : quantities) out += " | " + q.label;
        return out;
    }
};

/// Mean and sample standard deviation; the values are summed in sorted order so
/// the result does not depend on fold order.
inline QuantitySummary summarize(std::vector<double> values) {
    if (values.size() < 2) throw EvalError("summarize: need at least 2 values");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    QuantitySummary s;
    s.min = values.front();
    s.max = values.back();
    s.mean = std::clamp(sum / n, s.min, s.max);
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
    return s;
}

inline CrossValSummary aggregate_folds(const std::vector<EvalReport>& reports) {
    if (reports.size() < 2) throw EvalError("aggregate_folds: need at least 2 fold reports");
    const auto first = reports.front().quantities();
    std::vector<std::vector<double>> columns(first.size());
    for (const auto& r : reports) {
        const auto q = r.quantities();
        bool same = q.size() == first.size();
        for (std::size_t i = 0; same && i < q.size(); ++i) same = q[i].key == first[i].key;
        if (!same) throw EvalError("aggregate_folds: fold " + std::to_string(r.fold_id) + " has mismatched quantities");
        for (std::size_t i = 0; i < q.size(); ++i) columns[i].push_back(q[i].value);
    }
    CrossValSummary out;
    out.fold_count = reports.size();
    for (std::size_t i = 0; i < first.size(); ++i) {
        auto s = summarize(columns[i]);
        s.key = first[i].key;
        s.label = first[i].label;
        out.quantities.push_back(std::move(s));
    }
    return out;
}

} // namespace bioeval
