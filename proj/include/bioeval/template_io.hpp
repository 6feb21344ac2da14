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

// Template files.
//
// JSON-lines: one object per line,
//   {"subject": "...", "session": "...", "source": "...", "layer": "fc"|"score", "features": [...]}
// CSV: header `subject,session,source,layer,f0,...,f{d-1}`, '.' decimal separator,
// no quoting (labels must not contain ',', '"' or line breaks).
// Both readers skip a leading UTF-8 byte-order mark and blank lines.

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bioeval/format.hpp"
#include "bioeval/templates.hpp"

namespace bioeval {

enum class TemplateFormat { jsonl, csv };

inline std::optional<TemplateFormat> parse_template_format(std::string_view s) {
    if (s == "jsonl") return TemplateFormat::jsonl;
    if (s == "csv") return TemplateFormat::csv;
    return std::nullopt;
}

/// `.csv` means CSV, anything else JSON-lines.
inline TemplateFormat format_from_path(const std::filesystem::path& p) {
    return p.extension() == ".csv" ? TemplateFormat::csv : TemplateFormat::jsonl;
}

struct LoadOptions {
    /// Replace negative values with 0 instead of rejecting the file.
    bool clamp_negative = false;
    /// Keep only records of this layer; others are skipped before validation.
    std::optional<Layer> layer;
};

namespace detail {

inline void strip_bom(std::string& line) {
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
        line.erase(0, 3);
}

inline void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline bool is_blank(std::string_view s) {
    return s.find_first_not_of(" \t") == std::string_view::npos;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline FeatureTemplate parse_jsonl_record(const std::string& line, const std::string& rec) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw TemplateError(rec + ": invalid JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw TemplateError(rec + ": expected a JSON object");
    auto str_field = [&](const char* name) {
        auto it = j.find(name);
        if (it == j.end() || !it->is_string())
            throw TemplateError(rec + ": missing or non-string field '" + name + "'");
        return it->get<std::string>();
    };
    FeatureTemplate t;
    t.subject = str_field("subject");
    t.session = str_field("session");
    t.source = str_field("source");
    auto layer = parse_layer(str_field("layer"));
    if (!layer) throw TemplateError(rec + ": field 'layer' must be \"fc\" or \"score\"");
    t.layer = *layer;
    auto it = j.find("features");
    if (it == j.end() || !it->is_array()) throw TemplateError(rec + ": missing array field 'features'");
    t.features.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_number()) throw TemplateError(rec + ": non-numeric feature value");
        t.features.push_back(v.get<double>());
    }
    return t;
}

} // namespace detail

/// Reads and validates templates from a stream. `origin` prefixes error messages.
inline TemplateSet read_templates(std::istream& in, TemplateFormat format, const LoadOptions& opts = {},
                                  const std::string& origin = "<stream>") {
    std::vector<FeatureTemplate> kept;
    std::vector<std::size_t> record_numbers;
    std::size_t clamped = 0;
    std::size_t record = 0;
    std::size_t csv_dim = 0;
    bool header_seen = false;
    bool first_line = true;
    std::string line;

    while (std::getline(in, line)) {
        if (first_line) {
            detail::strip_bom(line);
            first_line = false;
        }
        detail::strip_cr(line);
        if (detail::is_blank(line)) continue;

        if (format == TemplateFormat::csv && !header_seen) {
            auto cols = detail::split_commas(line);
            static constexpr std::string_view fixed[] = {"subject", "session", "source", "layer"};
            if (cols.size() < 5) throw TemplateError(origin + ": CSV header needs at least one feature column");
            for (std::size_t i = 0; i < 4; ++i)
                if (cols[i] != fixed[i])
                    throw TemplateError(origin + ": CSV header column " + std::to_string(i + 1) + " must be '" +
                                        std::string(fixed[i]) + "'");
            for (std::size_t i = 4; i < cols.size(); ++i)
                if (cols[i] != "f" + std::to_string(i - 4))
                    throw TemplateError(origin + ": CSV header column " + std::to_string(i + 1) + " must be 'f" +
                                        std::to_string(i - 4) + "'");
            csv_dim = cols.size() - 4;
            header_seen = true;
            continue;
        }

        ++record;
        const std::string rec = origin + ": record " + std::to_string(record);
        FeatureTemplate t;
        if (format == TemplateFormat::jsonl) {
            t = detail::parse_jsonl_record(line, rec);
        } else {
            auto cols = detail::split_commas(line);
            if (cols.size() < 5) throw TemplateError(rec + ": too few columns");
            if (cols.size() - 4 != csv_dim)
                throw TemplateError(rec + ": dimension " + std::to_string(cols.size() - 4) +
                                    " does not match header dimension " + std::to_string(csv_dim));
            t.subject = std::string(cols[0]);
            t.session = std::string(cols[1]);
            t.source = std::string(cols[2]);
            auto layer = parse_layer(cols[3]);
            if (!layer) throw TemplateError(rec + ": layer must be 'fc' or 'score'");
            t.layer = *layer;
            t.features.resize(csv_dim);
            for (std::size_t i = 0; i < csv_dim; ++i)
                if (!parse_double(cols[i + 4], t.features[i]))
                    throw TemplateError(rec + ": unparsable number '" + std::string(cols[i + 4]) + "'");
        }
        if (opts.layer && t.layer != *opts.layer) continue;
        if (opts.clamp_negative) {
            for (double& v : t.features)
                if (std::isfinite(v) && v < 0.0) {
                    v = 0.0;
                    ++clamped;
                }
        }
        kept.push_back(std::move(t));
        record_numbers.push_back(record);
    }
    if (in.bad()) throw TemplateError(origin + ": read error");
    if (kept.empty()) {
        std::string what = origin + ": no template records";
        if (opts.layer) what += " with layer '" + std::string(layer_name(*opts.layer)) + "'";
        throw TemplateError(what);
    }
    try {
        return TemplateSet::create(std::move(kept), record_numbers, clamped);
    } catch (const TemplateError& e) {
        throw TemplateError(origin + ": " + e.what());
    }
}

/// Loads a template file; see LoadOptions for the clamp and layer-filter rules.
inline TemplateSet load_templates(const std::filesystem::path& path, TemplateFormat format,
                                  const LoadOptions& opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TemplateError(path.string() + ": cannot open file");
    return read_templates(in, format, opts, path.string());
}

inline TemplateSet load_templates(const std::filesystem::path& path, const LoadOptions& opts = {}) {
    return load_templates(path, format_from_path(path), opts);
}

/// Serializes so that read_templates returns an identical set.
inline void write_templates(std::ostream& out, const TemplateSet& ts, TemplateFormat format) {
    if (format == TemplateFormat::jsonl) {
        for (const auto& t : ts) {
            nlohmann::ordered_json j;
            j["subject"] = t.subject;
            j["session"] = t.session;
            j["source"] = t.source;
            j["layer"] = layer_name(t.layer);
            j["features"] = t.features;
            out << j.dump() << '\n';
        }
        return;
    }
    auto check_label = [](const std::string& s) {
        if (s.find_first_of(",\"\r\n") != std::string::npos)
            throw TemplateError("CSV labels must not contain ',', '\"' or line breaks: '" + s + "'");
    };
    out << "subject,session,source,layer";
    for (std::size_t i = 0; i < ts.dimension(); ++i) out << ",f" << i;
    out << '\n';
    for (const auto& t : ts) {
        check_label(t.subject);
        check_label(t.session);
        check_label(t.source);
        out << t.subject << ',' << t.session << ',' << t.source << ',' << layer_name(t.layer);
        for (double v : t.features) out << ',' << format_double(v);
        out << '\n';
    }
}

inline std::string templates_to_string(const TemplateSet& ts, TemplateFormat format) {
    std::ostringstream os;
    write_templates(os, ts, format);
    return os.str();
}

} // namespace bioeval
