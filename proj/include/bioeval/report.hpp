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

// Curve and report encodings. Rates are fractions in every machine-readable
// field; the percent "mean ± std" strings are for tables only.

#pragma once

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bioeval/evaluator.hpp"
#include "bioeval/format.hpp"

namespace bioeval {

inline std::string roc_to_csv(const RocCurve& rc) {
    std::ostringstream os;
    os << "threshold,far,tar\n";
    for (const auto& p : rc.points)
        os << format_double(p.threshold) << ',' << format_double(p.far) << ',' << format_double(p.tar) << '\n';
    return os.str();
}

inline std::string cmc_to_csv(const CmcCurve& cmc) {
    std::ostringstream os;
    os << "rank,rate\n";
    for (std::size_t k = 0; k < cmc.rates.size(); ++k) os << (k + 1) << ',' << format_double(cmc.rates[k]) << '\n';
    return os.str();
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["fold_id"] = r.fold_id;
    j["units"] = "fraction";
    if (!r.tar_at_far.empty()) {
        nlohmann::ordered_json t = nlohmann::ordered_json::object();
        for (const auto& [target, tar] : r.tar_at_far) t[format_double(target)] = tar;
        j["tar_at_far"] = t;
    }
    if (r.eer) j["eer"] = *r.eer;
    if (r.auc) j["auc"] = *r.auc;
    if (!r.rank_k.empty()) {
        nlohmann::ordered_json t = nlohmann::ordered_json::object();
        for (const auto& [k, rate] : r.rank_k) t[std::to_string(k)] = rate;
        j["rank_k"] = t;
    }
    return j;
}

inline nlohmann::ordered_json to_json(const CrossValSummary& s, std::string_view row_name) {
    nlohmann::ordered_json j;
    j["units"] = "fraction";
    j["fold_count"] = s.fold_count;
    nlohmann::ordered_json qs = nlohmann::ordered_json::array();
    for (const auto& q : s.quantities) {
        nlohmann::ordered_json e;
        e["key"] = q.key;
        e["label"] = q.label;
        e["mean"] = q.mean;
        e["std"] = q.stddev;
        e["min"] = q.min;
        e["max"] = q.max;
        e["formatted_percent"] = format_mean_std(q.mean, q.stddev);
        qs.push_back(std::move(e));
    }
    j["quantities"] = std::move(qs);
    j["table_header"] = s.header("Metric");
    j["table_row"] = s.row(row_name);
    return j;
}

/// One CSV table: header `name,<labels...>`, one row per summary, cells "mean ± std" in percent.
inline std::string summaries_to_csv(const std::vector<std::pair<std::string, CrossValSummary>>& rows,
                                    std::string_view first_column = "metric") {
    std::ostringstream os;
    if (rows.empty()) return {};
    os << first_column;
    for (const auto& q : rows.front().second.quantities) os << ',' << q.label;
    os << '\n';
    for (const auto& [name, s] : rows) {
        os << name;
        for (const auto& q : s.quantities) os << ',' << format_mean_std(q.mean, q.stddev);
        os << '\n';
    }
    return os.str();
}

} // namespace bioeval
