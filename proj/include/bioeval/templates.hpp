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
#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace bioeval {

/// Raised for any template data that violates the data model.
class TemplateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Which network layer produced a template.
enum class Layer { fc, score };

inline std::string_view layer_name(Layer l) { return l == Layer::fc ? "fc" : "score"; }

inline std::optional<Layer> parse_layer(std::string_view s) {
    if (s == "fc") return Layer::fc;
    if (s == "score") return Layer::score;
    return std::nullopt;
}

/// Identity of a template inside a probe or gallery list.
///
/// The source tag is part of the key so that, e.g., a synthesized probe and a
/// real gallery template from the same subject and session stay distinct.
struct TemplateKey {
    std::string subject;
    std::string session;
    std::string source;

    auto operator<=>(const TemplateKey&) const = default;
    bool operator==(const TemplateKey&) const = default;
};

inline std::string to_string(const TemplateKey& k) {
    std::string s = k.subject + "/" + k.session;
    if (!k.source.empty()) s += "/" + k.source;
    return s;
}

struct FeatureTemplate {
    std::string subject;
    std::string session;
    std::string source;
    Layer layer = Layer::fc;
    std::vector<double> features;

    TemplateKey key() const { return {subject, session, source}; }
    std::size_t dimension() const { return features.size(); }

    bool operator==(const FeatureTemplate&) const = default;
};

/// Validated, immutable collection of templates sharing one dimension.
class TemplateSet {
public:
    TemplateSet() = default;

    /// Validates and takes ownership. Record numbers in error messages are 1-based
    /// positions in `templates` (or `record_numbers[i]` when supplied).
    static TemplateSet create(std::vector<FeatureTemplate> templates,
                              const std::vector<std::size_t>& record_numbers = {},
                              std::size_t clamped_values = 0) {
        auto record_of = [&](std::size_t i) {
            return i < record_numbers.size() ? record_numbers[i] : i + 1;
        };
        TemplateSet ts;
        ts.clamped_ = clamped_values;
        std::set<std::tuple<std::string, std::string, std::string, Layer>> seen;
        for (std::size_t i = 0; i < templates.size(); ++i) {
            const auto& t = templates[i];
            const auto rec = "record " + std::to_string(record_of(i));
            if (t.features.empty()) throw TemplateError(rec + ": empty feature vector");
            if (i == 0) {
                ts.dimension_ = t.features.size();
            } else if (t.features.size() != ts.dimension_) {
                throw TemplateError(rec + ": dimension " + std::to_string(t.features.size()) +
                                    " does not match dimension " + std::to_string(ts.dimension_) +
                                    " of preceding records");
            }
            for (std::size_t j = 0; j < t.features.size(); ++j) {
                const double v = t.features[j];
                if (!std::isfinite(v))
                    throw TemplateError(rec + ": non-finite value at feature " + std::to_string(j));
                if (v < 0.0)
                    throw TemplateError(rec + ": negative value at feature " + std::to_string(j));
            }
            if (!seen.emplace(t.subject, t.session, t.source, t.layer).second)
                throw TemplateError(rec + ": duplicate key (" + t.subject + ", " + t.session + ", " +
                                    t.source + ", " + std::string(layer_name(t.layer)) + ")");
            ts.roster_.insert(t.subject);
            ts.sessions_.insert(t.session);
        }
        ts.templates_ = std::move(templates);
        return ts;
    }

    const std::vector<FeatureTemplate>& templates() const { return templates_; }
    std::size_t size() const { return templates_.size(); }
    bool empty() const { return templates_.empty(); }
    /// 0 for an empty set.
    std::size_t dimension() const { return dimension_; }
    const std::set<std::string>& subject_roster() const { return roster_; }
    const std::set<std::string>& sessions() const { return sessions_; }
    /// Number of negative values that were clamped to zero during ingestion.
    std::size_t clamped_values() const { return clamped_; }

    auto begin() const { return templates_.begin(); }
    auto end() const { return templates_.end(); }

    /// Subset satisfying `pred`; the clamp tally is not carried over.
    template <typename Pred>
    TemplateSet filter(Pred&& pred) const {
        std::vector<FeatureTemplate> kept;
        for (const auto& t : templates_)
            if (std::invoke(pred, t)) kept.push_back(t);
        return create(std::move(kept));
    }

    bool operator==(const TemplateSet& o) const {
        return dimension_ == o.dimension_ && templates_ == o.templates_;
    }

private:
    std::vector<FeatureTemplate> templates_;
    std::size_t dimension_ = 0;
    std::set<std::string> roster_;
    std::set<std::string> sessions_;
    std::size_t clamped_ = 0;
};

/// Scales features to unit sum. Throws when no feature is positive.
inline std::vector<double> l1_normalize(std::vector<double> v) {
    double sum = 0.0;
    for (double x : v) {
        if (!std::isfinite(x) || x < 0.0)
            throw TemplateError("l1_normalize: features must be finite and non-negative");
        sum += x;
    }
    if (!(sum > 0.0)) throw TemplateError("l1_normalize: all-zero vector cannot be normalized");
    for (double& x : v) x /= sum;
    return v;
}

inline FeatureTemplate l1_normalize(FeatureTemplate t) {
    t.features = l1_normalize(std::move(t.features));
    return t;
}

inline TemplateSet l1_normalize(const TemplateSet& ts) {
    std::vector<FeatureTemplate> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.push_back(l1_normalize(t));
    return TemplateSet::create(std::move(out));
}

/// One cross-validation fold: a single held-out acquisition session.
struct FoldSpec {
    int fold_id = 0; // 1-based
    std::set<std::string> train_sessions;
    std::string test_session;

    bool operator==(const FoldSpec&) const = default;
};

/// One fold per distinct session, ordered by session id.
inline std::vector<FoldSpec> split_folds(const std::set<std::string>& sessions) {
    if (sessions.size() < 2)
        throw TemplateError("split_folds: need at least 2 distinct sessions, got " +
                            std::to_string(sessions.size()));
    std::vector<FoldSpec> folds;
    int id = 1;
    for (const auto& test : sessions) {
        FoldSpec f;
        f.fold_id = id++;
        f.test_session = test;
        for (const auto& s : sessions)
            if (s != test) f.train_sessions.insert(s);
        folds.push_back(std::move(f));
    }
    return folds;
}

inline std::vector<FoldSpec> split_folds(const TemplateSet& ts) { return split_folds(ts.sessions()); }

} // namespace bioeval
