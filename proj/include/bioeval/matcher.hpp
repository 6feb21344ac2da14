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
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "bioeval/metrics.hpp"
#include "bioeval/templates.hpp"

namespace bioeval {

class MatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is visited
/// exactly once; callers write into pre-sized slots so results do not depend on
/// scheduling. The first exception thrown by any worker is rethrown.
template <typename Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Probe x gallery distances. Rows and columns are sorted by key.
struct ScoreMatrix {
    std::vector<TemplateKey> probe_keys;
    std::vector<TemplateKey> gallery_keys;
    MetricId metric = MetricId::city_block;
    std::vector<Distance> distances; // row-major, probe_keys.size() x gallery_keys.size()

    std::size_t rows() const { return probe_keys.size(); }
    std::size_t cols() const { return gallery_keys.size(); }
    const Distance& at(std::size_t r, std::size_t c) const { return distances.at(r * cols() + c); }
};

namespace detail {

inline std::vector<const FeatureTemplate*> sorted_by_key(const TemplateSet& ts) {
    std::vector<const FeatureTemplate*> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.push_back(&t);
    std::stable_sort(out.begin(), out.end(),
                     [](const FeatureTemplate* a, const FeatureTemplate* b) { return a->key() < b->key(); });
    return out;
}

} // namespace detail

inline ScoreMatrix score_matrix(const TemplateSet& probes, const TemplateSet& gallery, MetricId metric,
                                unsigned workers = 1) {
    if (gallery.empty()) throw MatchError("score_matrix: empty gallery");
    if (!probes.empty() && probes.dimension() != gallery.dimension())
        throw MatchError("score_matrix: dimension mismatch (probe " + std::to_string(probes.dimension()) +
                         " vs gallery " + std::to_string(gallery.dimension()) + ")");
    const auto p = detail::sorted_by_key(probes);
    const auto g = detail::sorted_by_key(gallery);

    ScoreMatrix sm;
    sm.metric = metric;
    for (auto* t : p) sm.probe_keys.push_back(t->key());
    for (auto* t : g) sm.gallery_keys.push_back(t->key());
    sm.distances.resize(p.size() * g.size());
    const std::size_t cols = g.size();
    parallel_for(p.size(), workers, [&](std::size_t r) {
        for (std::size_t c = 0; c < cols; ++c)
            sm.distances[r * cols + c] = distance_unchecked(metric, p[r]->features, g[c]->features);
    });
    return sm;
}

/// CSV dump: header `probe,<gallery key>...`, one row per probe, `inf` for the sentinel.
inline void write_score_matrix_csv(std::ostream& out, const ScoreMatrix& sm) {
    out << "probe";
    for (const auto& k : sm.gallery_keys) out << ',' << to_string(k);
    out << '\n';
    for (std::size_t r = 0; r < sm.rows(); ++r) {
        out << to_string(sm.probe_keys[r]);
        for (std::size_t c = 0; c < sm.cols(); ++c) out << ',' << to_string(sm.at(r, c));
        out << '\n';
    }
}

struct LabeledScores {
    std::vector<Distance> genuine;
    std::vector<Distance> impostor;
    /// Cells excluded because probe key == gallery key.
    std::size_t self_pairs = 0;

    /// True when no probe shares a subject with the gallery; ROC analysis is impossible.
    bool genuine_empty() const { return genuine.empty(); }
};

/// Splits every cell into genuine (same subject) or impostor, dropping exact self-pairs.
inline LabeledScores label_scores(const ScoreMatrix& sm) {
    LabeledScores ls;
    for (std::size_t r = 0; r < sm.rows(); ++r) {
        for (std::size_t c = 0; c < sm.cols(); ++c) {
            const auto& pk = sm.probe_keys[r];
            const auto& gk = sm.gallery_keys[c];
            if (pk == gk) {
                ++ls.self_pairs;
                continue;
            }
            (pk.subject == gk.subject ? ls.genuine : ls.impostor).push_back(sm.at(r, c));
        }
    }
    return ls;
}

struct RankEntry {
    std::string subject;
    Distance distance;

    bool operator==(const RankEntry&) const = default;
};

/// One probe's gallery subjects, best match first.
struct RankList {
    TemplateKey probe;
    std::vector<RankEntry> entries;

    /// 1-based position of `subject`, or nullopt when absent.
    std::optional<std::size_t> position_of(std::string_view subject) const {
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (entries[i].subject == subject) return i + 1;
        return std::nullopt;
    }
};

enum class Fusion { min, mean };

inline std::optional<Fusion> parse_fusion(std::string_view s) {
    if (s == "min") return Fusion::min;
    if (s == "mean") return Fusion::mean;
    return std::nullopt;
}

inline std::string_view fusion_name(Fusion f) { return f == Fusion::min ? "min" : "mean"; }

namespace detail {

inline bool rank_less(const RankEntry& a, const RankEntry& b) {
    if (a.distance < b.distance) return true;
    if (b.distance < a.distance) return false;
    return a.subject < b.subject;
}

} // namespace detail

/// Per-probe subject ranking. A subject with several gallery columns gets their
/// min (any finite column wins) or mean (any infinite column makes it infinite).
/// Ties are broken by subject id.
inline std::vector<RankList> rank_gallery(const ScoreMatrix& sm, Fusion fusion = Fusion::min) {
    std::map<std::string, std::vector<std::size_t>> columns_of;
    for (std::size_t c = 0; c < sm.cols(); ++c) columns_of[sm.gallery_keys[c].subject].push_back(c);

    std::vector<RankList> out;
    out.reserve(sm.rows());
    for (std::size_t r = 0; r < sm.rows(); ++r) {
        RankList rl;
        rl.probe = sm.probe_keys[r];
        rl.entries.reserve(columns_of.size());
        for (const auto& [subject, cols] : columns_of) {
            Distance fused;
            if (fusion == Fusion::min) {
                fused = Distance::infinite();
                for (auto c : cols) fused = std::min(fused, sm.at(r, c), [](Distance a, Distance b) { return a < b; });
            } else {
                double sum = 0.0;
                bool inf = false;
                for (auto c : cols) {
                    if (sm.at(r, c).is_infinite()) {
                        inf = true;
                        break;
                    }
                    sum += sm.at(r, c).value();
                }
                fused = inf ? Distance::infinite() : Distance(sum / static_cast<double>(cols.size()));
            }
            rl.entries.push_back({subject, fused});
        }
        std::sort(rl.entries.begin(), rl.entries.end(), detail::rank_less);
        out.push_back(std::move(rl));
    }
    return out;
}

/// Ranks subjects by descending class score; template feature i is the score of roster[i].
/// Entries carry the distance-polarity value 1 - score, so scores must lie in [0, 1].
inline std::vector<RankList> rank_from_class_scores(const TemplateSet& ts, const std::vector<std::string>& roster) {
    if (roster.empty()) throw MatchError("rank_from_class_scores: empty roster");
    if (!ts.empty() && ts.dimension() != roster.size())
        throw MatchError("rank_from_class_scores: template dimension " + std::to_string(ts.dimension()) +
                         " does not match roster size " + std::to_string(roster.size()));
    {
        auto sorted = roster;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw MatchError("rank_from_class_scores: duplicate subject in roster");
    }
    std::vector<RankList> out;
    for (const auto* t : detail::sorted_by_key(ts)) {
        if (t->layer != Layer::score)
            throw MatchError("rank_from_class_scores: template " + to_string(t->key()) + " is not a score template");
        std::vector<std::size_t> order(roster.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (double s : t->features)
            if (s > 1.0)
                throw MatchError("rank_from_class_scores: class score above 1 in " + to_string(t->key()));
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (t->features[a] != t->features[b]) return t->features[a] > t->features[b];
            return roster[a] < roster[b];
        });
        RankList rl;
        rl.probe = t->key();
        for (auto i : order) rl.entries.push_back({roster[i], Distance(1.0 - t->features[i])});
        out.push_back(std::move(rl));
    }
    return out;
}

} // namespace bioeval
