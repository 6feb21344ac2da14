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

// Distance kernels between non-negative feature vectors p and q of equal
// dimension d. Every kernel is a single left-to-right pass accumulated in
// double precision.
//
//   city_block      sum |p-q|
//   kulczynski_d    sum |p-q| / sum min(p,q)
//   czekanowski     1 - 2 sum min(p,q) / sum (p+q)
//   dice            1 - 2 sum p*q / (sum p^2 + sum q^2)
//   squared         sum (p-q)^2 / (p+q)
//   squared_chord   sum (sqrt p - sqrt q)^2
//   jensen_shannon  1/2 [ sum p ln(2p/(p+q)) + sum q ln(2q/(p+q)) ]
//
// Degenerate terms: a squared term with p+q = 0 is 0; 0 ln 0 = 0;
// kulczynski_d with a zero denominator is 0 if the numerator is 0 and
// Distance::infinite() otherwise; czekanowski and dice of two all-zero
// vectors are 0.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bioeval/format.hpp"

namespace bioeval {

class MetricError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class MetricId { city_block, kulczynski_d, czekanowski, dice, squared, squared_chord, jensen_shannon };

inline constexpr std::array<MetricId, 7> all_metrics = {
    MetricId::city_block, MetricId::kulczynski_d, MetricId::czekanowski,   MetricId::dice,
    MetricId::squared,    MetricId::squared_chord, MetricId::jensen_shannon,
};

inline constexpr std::string_view metric_name(MetricId m) {
    switch (m) {
    case MetricId::city_block: return "city_block";
    case MetricId::kulczynski_d: return "kulczynski_d";
    case MetricId::czekanowski: return "czekanowski";
    case MetricId::dice: return "dice";
    case MetricId::squared: return "squared";
    case MetricId::squared_chord: return "squared_chord";
    case MetricId::jensen_shannon: return "jensen_shannon";
    }
    return "?";
}

/// Human-readable name used in report tables.
inline constexpr std::string_view metric_display_name(MetricId m) {
    switch (m) {
    case MetricId::city_block: return "City Block";
    case MetricId::kulczynski_d: return "Kulczynski d";
    case MetricId::czekanowski: return "Czekanowski";
    case MetricId::dice: return "Dice";
    case MetricId::squared: return "Squared";
    case MetricId::squared_chord: return "Squared-Chord";
    case MetricId::jensen_shannon: return "Jensen-Shannon";
    }
    return "?";
}

inline std::optional<MetricId> parse_metric(std::string_view s) {
    for (auto m : all_metrics)
        if (metric_name(m) == s) return m;
    return std::nullopt;
}

/// Non-negative distance, or a sentinel that compares greater than every finite one.
class Distance {
public:
    constexpr Distance() = default;
    constexpr explicit Distance(double v) : value_(v) {}

    static constexpr Distance infinite() {
        Distance d;
        d.infinite_ = true;
        return d;
    }

    constexpr bool is_infinite() const { return infinite_; }
    constexpr bool is_finite() const { return !infinite_; }
    /// Only meaningful for finite distances.
    constexpr double value() const { return value_; }

    constexpr std::partial_ordering operator<=>(const Distance& o) const {
        if (infinite_ || o.infinite_) {
            if (infinite_ == o.infinite_) return std::partial_ordering::equivalent;
            return infinite_ ? std::partial_ordering::greater : std::partial_ordering::less;
        }
        return value_ <=> o.value_;
    }
    constexpr bool operator==(const Distance& o) const {
        return infinite_ == o.infinite_ && (infinite_ || value_ == o.value_);
    }

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

/// `inf` for the sentinel, shortest round-trip decimal otherwise.
inline std::string to_string(Distance d) { return d.is_infinite() ? "inf" : format_double(d.value()); }

namespace kernels {

inline double city_block(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return s;
}

inline Distance kulczynski_d(std::span<const double> p, std::span<const double> q) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        num += std::abs(p[i] - q[i]);
        den += std::min(p[i], q[i]);
    }
    if (den == 0.0) return num == 0.0 ? Distance(0.0) : Distance::infinite();
    return Distance(num / den);
}

inline double czekanowski(std::span<const double> p, std::span<const double> q) {
    double mins = 0.0, total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        mins += std::min(p[i], q[i]);
        total += p[i] + q[i];
    }
    if (total == 0.0) return 0.0;
    return std::max(0.0, 1.0 - 2.0 * mins / total);
}

inline double dice(std::span<const double> p, std::span<const double> q) {
    double cross = 0.0, pp = 0.0, qq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        cross += p[i] * q[i];
        pp += p[i] * p[i];
        qq += q[i] * q[i];
    }
    if (pp + qq == 0.0) return 0.0;
    return std::max(0.0, 1.0 - 2.0 * cross / (pp + qq));
}

inline double squared(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double sum = p[i] + q[i];
        if (sum > 0.0) {
            const double diff = p[i] - q[i];
            s += diff * diff / sum;
        }
    }
    return s;
}

inline double squared_chord(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double diff = std::sqrt(p[i]) - std::sqrt(q[i]);
        s += diff * diff;
    }
    return s;
}

inline double jensen_shannon(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double sum = p[i] + q[i];
        if (p[i] > 0.0) s += p[i] * std::log(2.0 * p[i] / sum);
        if (q[i] > 0.0) s += q[i] * std::log(2.0 * q[i] / sum);
    }
    return std::max(0.0, 0.5 * s);
}

} // namespace kernels

/// Throws MetricError unless p and q are equal-length, non-empty, finite and non-negative.
inline void check_metric_inputs(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw MetricError("distance: dimension mismatch (" + std::to_string(p.size()) + " vs " +
                          std::to_string(q.size()) + ")");
    if (p.empty()) throw MetricError("distance: empty feature vectors");
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!std::isfinite(p[i]) || !std::isfinite(q[i]))
            throw MetricError("distance: non-finite component at index " + std::to_string(i));
        if (p[i] < 0.0 || q[i] < 0.0)
            throw MetricError("distance: negative component at index " + std::to_string(i));
    }
}

/// Skips input validation; callers must have validated (TemplateSet does).
inline Distance distance_unchecked(MetricId metric, std::span<const double> p, std::span<const double> q) {
    switch (metric) {
    case MetricId::city_block: return Distance(kernels::city_block(p, q));
    case MetricId::kulczynski_d: return kernels::kulczynski_d(p, q);
    case MetricId::czekanowski: return Distance(kernels::czekanowski(p, q));
    case MetricId::dice: return Distance(kernels::dice(p, q));
    case MetricId::squared: return Distance(kernels::squared(p, q));
    case MetricId::squared_chord: return Distance(kernels::squared_chord(p, q));
    case MetricId::jensen_shannon: return Distance(kernels::jensen_shannon(p, q));
    }
    throw MetricError("distance: unknown metric");
}

inline Distance distance(MetricId metric, std::span<const double> p, std::span<const double> q) {
    check_metric_inputs(p, q);
    return distance_unchecked(metric, p, q);
}

} // namespace bioeval
