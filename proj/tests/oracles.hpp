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

// Test-only reference implementations. Nothing here calls the code under test
// except for shared plain data types.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bioeval/evaluator.hpp"
#include "bioeval/metrics.hpp"

namespace oracle {

/// Direct evaluation of each distance formula in long double, summing from the
/// last index down. nullopt stands for an infinite Kulczynski distance.
inline std::optional<long double> metric(bioeval::MetricId m, const std::vector<double>& pd,
                                         const std::vector<double>& qd) {
    const std::size_t d = pd.size();
    auto P = [&](std::size_t i) { return static_cast<long double>(pd[d - 1 - i]); };
    auto Q = [&](std::size_t i) { return static_cast<long double>(qd[d - 1 - i]); };
    long double a = 0, b = 0, c = 0;
    switch (m) {
    case bioeval::MetricId::city_block:
        for (std::size_t i = 0; i < d; ++i) a += std::fabs(P(i) - Q(i));
        return a;
    case bioeval::MetricId::kulczynski_d:
        for (std::size_t i = 0; i < d; ++i) {
            a += std::fabs(P(i) - Q(i));
            b += std::min(P(i), Q(i));
        }
        if (b == 0) return a == 0 ? std::optional<long double>(0) : std::nullopt;
        return a / b;
    case bioeval::MetricId::czekanowski:
        for (std::size_t i = 0; i < d; ++i) {
            a += std::min(P(i), Q(i));
            b += P(i) + Q(i);
        }
        return b == 0 ? 0 : 1 - 2 * a / b;
    case bioeval::MetricId::dice:
        for (std::size_t i = 0; i < d; ++i) {
            a += P(i) * Q(i);
            b += P(i) * P(i);
            c += Q(i) * Q(i);
        }
        return b + c == 0 ? 0 : 1 - 2 * a / (b + c);
    case bioeval::MetricId::squared:
        for (std::size_t i = 0; i < d; ++i)
            if (P(i) + Q(i) != 0) a += (P(i) - Q(i)) * (P(i) - Q(i)) / (P(i) + Q(i));
        return a;
    case bioeval::MetricId::squared_chord:
        for (std::size_t i = 0; i < d; ++i) a += (std::sqrt(P(i)) - std::sqrt(Q(i))) * (std::sqrt(P(i)) - std::sqrt(Q(i)));
        return a;
    case bioeval::MetricId::jensen_shannon:
        for (std::size_t i = 0; i < d; ++i) {
            if (P(i) > 0) a += P(i) * std::log(2 * P(i) / (P(i) + Q(i)));
            if (Q(i) > 0) b += Q(i) * std::log(2 * Q(i) / (P(i) + Q(i)));
        }
        return (a + b) / 2;
    }
    return std::nullopt;
}

/// Exhaustive ROC: every candidate threshold tested by a full scan of both lists.
inline std::vector<bioeval::RocPoint> roc_sweep(const std::vector<bioeval::Distance>& gen,
                                               const std::vector<bioeval::Distance>& imp) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::set<double> candidates{-inf, inf};
    for (const auto* list : {&gen, &imp})
        for (const auto& d : *list)
            if (d.is_finite()) candidates.insert(d.value());
    auto accepted = [](const std::vector<bioeval::Distance>& v, double t) {
        std::size_t n = 0;
        for (const auto& d : v) {
            const bool ok = d.is_finite() ? d.value() <= t : t == inf;
            n += ok ? 1 : 0;
        }
        return static_cast<double>(n) / static_cast<double>(v.size());
    };
    std::vector<bioeval::RocPoint> out;
    for (double t : candidates) out.push_back({t, accepted(imp, t), accepted(gen, t)});
    return out;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Random non-negative vector with some exact zeros.
inline std::vector<double> random_features(std::mt19937_64& rng, std::size_t d, double zero_prob = 0.1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::exponential_distribution<double> e(1.5);
    std::vector<double> v(d);
    for (auto& x : v) x = u(rng) < zero_prob ? 0.0 : e(rng);
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
    return v;
}

} // namespace oracle
