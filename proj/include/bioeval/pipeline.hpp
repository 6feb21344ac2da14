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

// load -> match -> evaluate -> report, per fold and per metric.
//
// Commands build their outputs fully in memory; commit_outputs() then writes
// every file to a temporary name and renames them into place only after all
// writes succeeded.

#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bioeval/evaluator.hpp"
#include "bioeval/matcher.hpp"
#include "bioeval/metrics.hpp"
#include "bioeval/report.hpp"
#include "bioeval/template_io.hpp"
#include "bioeval/templates.hpp"

namespace bioeval {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ThresholdPolicy { per_set, transfer_from_validation };

inline std::optional<ThresholdPolicy> parse_threshold_policy(std::string_view s) {
    if (s == "per-set") return ThresholdPolicy::per_set;
    if (s == "transfer-from-validation") return ThresholdPolicy::transfer_from_validation;
    return std::nullopt;
}

inline std::string_view threshold_policy_name(ThresholdPolicy p) {
    return p == ThresholdPolicy::per_set ? "per-set" : "transfer-from-validation";
}

struct RunConfig {
    std::filesystem::path probe_path;
    /// Defaults to probe_path: every fold then matches its held-out session against the others.
    std::optional<std::filesystem::path> gallery_path;
    /// Probe templates used to pick thresholds under transfer-from-validation.
    std::optional<std::filesystem::path> validation_path;
    /// Score-index -> subject mapping for layer=score identification, one id per line.
    /// Defaults to the sorted subject ids of the probe file.
    std::optional<std::filesystem::path> roster_path;
    std::vector<MetricId> metrics{MetricId::dice};
    Layer layer = Layer::fc;
    bool normalize = false;
    bool clamp = false;
    Fusion fusion = Fusion::min;
    std::vector<double> far_targets{0.01, 0.001};
    std::vector<std::size_t> ranks{1};
    std::filesystem::path output_dir = ".";
    ThresholdPolicy threshold_policy = ThresholdPolicy::per_set;
    unsigned workers = 1;
};

/// "all" or a single metric name.
inline std::vector<MetricId> parse_metric_selection(std::string_view s) {
    if (s == "all") return {all_metrics.begin(), all_metrics.end()};
    auto m = parse_metric(s);
    if (!m) throw ConfigError("unknown metric '" + std::string(s) + "'");
    return {*m};
}

/// Checks invariants and canonicalizes: FAR targets sorted descending, ranks ascending, both deduplicated.
inline RunConfig validate(RunConfig cfg) {
    if (cfg.probe_path.empty()) throw ConfigError("--probe is required");
    auto readable = [](const std::filesystem::path& p, std::string_view what) {
        std::ifstream in(p);
        if (!in) throw ConfigError(std::string(what) + " file not readable: " + p.string());
    };
    readable(cfg.probe_path, "probe");
    if (cfg.gallery_path) readable(*cfg.gallery_path, "gallery");
    if (cfg.validation_path) readable(*cfg.validation_path, "validation");
    if (cfg.roster_path) readable(*cfg.roster_path, "roster");
    if (cfg.threshold_policy == ThresholdPolicy::transfer_from_validation && !cfg.validation_path)
        throw ConfigError("threshold policy transfer-from-validation requires --validation");
    if (cfg.metrics.empty()) throw ConfigError("no metric selected");
    if (cfg.far_targets.empty()) throw ConfigError("at least one FAR target is required");
    for (double t : cfg.far_targets)
        if (!(t > 0.0 && t < 1.0)) throw ConfigError("FAR target " + format_double(t) + " outside (0, 1)");
    std::sort(cfg.far_targets.begin(), cfg.far_targets.end(), std::greater<>());
    cfg.far_targets.erase(std::unique(cfg.far_targets.begin(), cfg.far_targets.end()), cfg.far_targets.end());
    for (auto k : cfg.ranks)
        if (k == 0) throw ConfigError("ranks are 1-based");
    std::sort(cfg.ranks.begin(), cfg.ranks.end());
    cfg.ranks.erase(std::unique(cfg.ranks.begin(), cfg.ranks.end()), cfg.ranks.end());
    if (cfg.workers == 0) cfg.workers = 1;
    if (cfg.output_dir.empty()) cfg.output_dir = ".";
    return cfg;
}

/// Files produced by one command, in write order.
struct Outputs {
    std::vector<std::pair<std::string, std::string>> files; // file name -> contents

    void add(std::string name, std::string contents) { files.emplace_back(std::move(name), std::move(contents)); }
};

/// Writes all outputs under `dir` via temporary files, then renames them into place.
/// On any failure the temporaries are removed and no final file is created.
inline void commit_outputs(const Outputs& out, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<fs::path> temps;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& t : temps) fs::remove(t, ec);
    };
    try {
        for (const auto& [name, contents] : out.files) {
            fs::path tmp = dir / (name + ".tmp");
            temps.push_back(tmp);
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            f << contents;
            f.close();
            if (!f) throw std::runtime_error("cannot write " + tmp.string());
        }
        for (std::size_t i = 0; i < out.files.size(); ++i) fs::rename(temps[i], dir / out.files[i].first);
    } catch (...) {
        cleanup();
        throw;
    }
}

namespace detail {

struct LoadedInputs {
    TemplateSet probes;
    TemplateSet gallery;
    std::optional<TemplateSet> validation;
};

inline TemplateSet load_for_run(const std::filesystem::path& path, const RunConfig& cfg) {
    LoadOptions opts;
    opts.clamp_negative = cfg.clamp;
    opts.layer = cfg.layer;
    auto ts = load_templates(path, opts);
    return cfg.normalize ? l1_normalize(ts) : ts;
}

inline LoadedInputs load_inputs(const RunConfig& cfg, bool need_gallery) {
    LoadedInputs in;
    in.probes = load_for_run(cfg.probe_path, cfg);
    if (need_gallery) in.gallery = cfg.gallery_path ? load_for_run(*cfg.gallery_path, cfg) : in.probes;
    if (cfg.validation_path) in.validation = load_for_run(*cfg.validation_path, cfg);
    if (need_gallery && in.gallery.dimension() != in.probes.dimension())
        throw ConfigError("probe dimension " + std::to_string(in.probes.dimension()) +
                          " does not match gallery dimension " + std::to_string(in.gallery.dimension()));
    return in;
}

inline TemplateSet in_session(const TemplateSet& ts, const std::string& session) {
    return ts.filter([&](const FeatureTemplate& t) { return t.session == session; });
}

inline TemplateSet in_sessions(const TemplateSet& ts, const std::set<std::string>& sessions) {
    return ts.filter([&](const FeatureTemplate& t) { return sessions.count(t.session) != 0; });
}

inline std::string job_context(std::string_view command, std::string_view metric, const FoldSpec& f) {
    return std::string(command) + ": metric " + std::string(metric) + ", fold " + std::to_string(f.fold_id) +
           " (test session " + f.test_session + ")";
}

inline std::string dump_json(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

inline nlohmann::ordered_json fold_json(const FoldSpec& f) {
    nlohmann::ordered_json j;
    j["fold_id"] = f.fold_id;
    j["test_session"] = f.test_session;
    j["train_sessions"] = f.train_sessions;
    return j;
}

/// Fills report.tar_at_far and returns the thresholds used, in target order.
inline std::vector<double> fill_tar_at_far(EvalReport& report, const RunConfig& cfg, const RocCurve& rc,
                                           const LabeledScores& ls, const std::optional<RocCurve>& validation_rc) {
    std::vector<double> thresholds;
    for (double target : cfg.far_targets) {
        if (cfg.threshold_policy == ThresholdPolicy::per_set) {
            thresholds.push_back(threshold_at_far(rc, target));
            report.tar_at_far[target] = tar_at_far(rc, target);
        } else {
            const double th = threshold_at_far(*validation_rc, target);
            thresholds.push_back(th);
            report.tar_at_far[target] = acceptance_rate(ls.genuine, th);
        }
    }
    return thresholds;
}

inline nlohmann::ordered_json thresholds_json(const RunConfig& cfg, const std::vector<double>& thresholds,
                                              const LabeledScores& ls) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        nlohmann::ordered_json e;
        e["target_far"] = cfg.far_targets[i];
        e["threshold"] = format_double(thresholds[i]);
        e["achieved_far"] = acceptance_rate(ls.impostor, thresholds[i]);
        arr.push_back(std::move(e));
    }
    return arr;
}

inline std::string summary_file(std::string_view command, std::string_view metric) {
    return std::string(command) + "_" + std::string(metric) + "_summary.json";
}

inline std::string fold_file(std::string_view command, std::string_view metric, int fold, std::string_view ext) {
    return std::string(command) + "_" + std::string(metric) + "_" + std::to_string(fold) + "." + std::string(ext);
}

} // namespace detail

/// FoldSpec partition of the probe file, one line per fold.
inline std::string run_folds(const RunConfig& cfg) {
    const auto probes = detail::load_for_run(cfg.probe_path, cfg);
    std::ostringstream os;
    for (const auto& f : split_folds(probes)) {
        os << "fold " << f.fold_id << ": test=" << f.test_session << " train=";
        bool first = true;
        for (const auto& s : f.train_sessions) {
            os << (first ? "" : ",") << s;
            first = false;
        }
        os << '\n';
    }
    return os.str();
}

/// 1:1 verification. Per metric and fold: ROC CSV and report JSON; per metric a
/// cross-fold summary JSON; one summary CSV table over all metrics run.
inline Outputs run_verify(const RunConfig& cfg_in) {
    const RunConfig cfg = validate(cfg_in);
    const auto in = detail::load_inputs(cfg, true);
    const auto folds = split_folds(in.probes);

    struct Job {
        MetricId metric;
        std::size_t fold;
        EvalReport report;
        std::string roc_csv;
        std::string report_json;
    };
    std::vector<Job> jobs;
    for (auto m : cfg.metrics)
        for (std::size_t f = 0; f < folds.size(); ++f) jobs.push_back({m, f, {}, {}, {}});

    parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
        auto& job = jobs[i];
        const auto& fold = folds[job.fold];
        const auto name = metric_name(job.metric);
        try {
            const auto probes = detail::in_session(in.probes, fold.test_session);
            const auto gallery = detail::in_sessions(in.gallery, fold.train_sessions);
            if (gallery.empty()) throw EvalError("no gallery templates in the training sessions");
            const auto ls = label_scores(score_matrix(probes, gallery, job.metric));
            if (ls.genuine_empty()) throw EvalError("no genuine pairs (probe and gallery subjects are disjoint)");
            const auto rc = roc_curve(ls);

            std::optional<RocCurve> vrc;
            if (cfg.threshold_policy == ThresholdPolicy::transfer_from_validation) {
                const auto vprobes = detail::in_session(*in.validation, fold.test_session);
                vrc = roc_curve(label_scores(score_matrix(vprobes, gallery, job.metric)));
            }

            job.report.fold_id = fold.fold_id;
            const auto thresholds = detail::fill_tar_at_far(job.report, cfg, rc, ls, vrc);
            job.report.eer = eer(rc);
            job.report.auc = auc(rc);
            job.roc_csv = roc_to_csv(rc);

            nlohmann::ordered_json j;
            j["command"] = "verify";
            j["metric"] = name;
            j["layer"] = layer_name(cfg.layer);
            j["normalized"] = cfg.normalize;
            j["threshold_policy"] = threshold_policy_name(cfg.threshold_policy);
            j["fold"] = detail::fold_json(fold);
            j["counts"] = {{"genuine", ls.genuine.size()}, {"impostor", ls.impostor.size()},
                           {"self_pairs", ls.self_pairs}};
            j["thresholds"] = detail::thresholds_json(cfg, thresholds, ls);
            j["report"] = to_json(job.report);
            job.report_json = detail::dump_json(j);
        } catch (const std::exception& e) {
            throw EvalError(detail::job_context("verify", name, fold) + ": " + e.what());
        }
    });

    Outputs out;
    std::vector<std::pair<std::string, CrossValSummary>> table;
    for (auto m : cfg.metrics) {
        std::vector<EvalReport> reports;
        for (const auto& job : jobs) {
            if (job.metric != m) continue;
            const int fid = folds[job.fold].fold_id;
            out.add(detail::fold_file("verify", metric_name(m), fid, "csv"), job.roc_csv);
            out.add(detail::fold_file("verify", metric_name(m), fid, "json"), job.report_json);
            reports.push_back(job.report);
        }
        auto summary = aggregate_folds(reports);
        nlohmann::ordered_json j;
        j["command"] = "verify";
        j["metric"] = metric_name(m);
        j["layer"] = layer_name(cfg.layer);
        j["threshold_policy"] = threshold_policy_name(cfg.threshold_policy);
        j["summary"] = to_json(summary, metric_display_name(m));
        out.add(detail::summary_file("verify", metric_name(m)), detail::dump_json(j));
        table.emplace_back(std::string(metric_display_name(m)), std::move(summary));
    }
    out.add("verify_summary.csv", summaries_to_csv(table));
    return out;
}

namespace detail {

inline std::vector<std::string> load_roster(const RunConfig& cfg, const TemplateSet& probes) {
    std::vector<std::string> roster;
    if (cfg.roster_path) {
        std::ifstream in(*cfg.roster_path);
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (first) strip_bom(line);
            first = false;
            strip_cr(line);
            if (!is_blank(line)) roster.push_back(line);
        }
    } else {
        roster.assign(probes.subject_roster().begin(), probes.subject_roster().end());
    }
    if (roster.size() != probes.dimension())
        throw ConfigError("roster has " + std::to_string(roster.size()) + " subjects but score templates have " +
                          std::to_string(probes.dimension()) + " features");
    return roster;
}

} // namespace detail

/// 1:N identification. layer=fc ranks gallery subjects by fused distance for each
/// metric; layer=score ranks the roster by class score (metric ignored, files
/// are tagged "scores"). Per fold: CMC CSV and report JSON; per metric a summary.
inline Outputs run_identify(const RunConfig& cfg_in) {
    const RunConfig cfg = validate(cfg_in);
    const bool by_scores = cfg.layer == Layer::score;
    const auto in = detail::load_inputs(cfg, !by_scores);
    const auto folds = split_folds(in.probes);
    const auto roster = by_scores ? detail::load_roster(cfg, in.probes) : std::vector<std::string>{};

    // nullopt = class-score ranking
    std::vector<std::optional<MetricId>> metrics;
    if (by_scores) metrics.push_back(std::nullopt);
    else metrics.assign(cfg.metrics.begin(), cfg.metrics.end());
    auto tag = [](const std::optional<MetricId>& m) { return m ? std::string(metric_name(*m)) : std::string("scores"); };

    struct Job {
        std::optional<MetricId> metric;
        std::size_t fold;
        EvalReport report;
        std::string cmc_csv;
        std::string report_json;
    };
    std::vector<Job> jobs;
    for (const auto& m : metrics)
        for (std::size_t f = 0; f < folds.size(); ++f) jobs.push_back({m, f, {}, {}, {}});

    parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
        auto& job = jobs[i];
        const auto& fold = folds[job.fold];
        const auto name = tag(job.metric);
        try {
            auto rank = [&](const TemplateSet& probes) {
                if (!job.metric) return rank_from_class_scores(probes, roster);
                const auto gallery = detail::in_sessions(in.gallery, fold.train_sessions);
                if (gallery.empty()) throw EvalError("no gallery templates in the training sessions");
                return rank_gallery(score_matrix(probes, gallery, *job.metric), cfg.fusion);
            };
            const auto ranks = rank(detail::in_session(in.probes, fold.test_session));
            const auto truth = truth_from_probes(ranks);
            const auto cmc = cmc_curve(ranks, truth);
            const auto ls = identification_scores(ranks, truth);
            const auto rc = roc_curve(ls);

            std::optional<RocCurve> vrc;
            if (cfg.threshold_policy == ThresholdPolicy::transfer_from_validation) {
                const auto vranks = rank(detail::in_session(*in.validation, fold.test_session));
                vrc = roc_curve(identification_scores(vranks, truth_from_probes(vranks)));
            }

            job.report.fold_id = fold.fold_id;
            const auto thresholds = detail::fill_tar_at_far(job.report, cfg, rc, ls, vrc);
            for (auto k : cfg.ranks) job.report.rank_k[k] = cmc.rate_at(k);
            job.cmc_csv = cmc_to_csv(cmc);

            nlohmann::ordered_json j;
            j["command"] = "identify";
            j["interpretation"] = identification_interpretation;
            j["metric"] = name;
            j["layer"] = layer_name(cfg.layer);
            if (job.metric) j["fusion"] = fusion_name(cfg.fusion);
            j["normalized"] = cfg.normalize;
            j["threshold_policy"] = threshold_policy_name(cfg.threshold_policy);
            j["fold"] = detail::fold_json(fold);
            j["counts"] = {{"probes", ranks.size()}, {"roster", cmc.rates.size()},
                           {"genuine", ls.genuine.size()}, {"impostor", ls.impostor.size()}};
            j["thresholds"] = detail::thresholds_json(cfg, thresholds, ls);
            j["report"] = to_json(job.report);
            job.report_json = detail::dump_json(j);
        } catch (const std::exception& e) {
            throw EvalError(detail::job_context("identify", name, fold) + ": " + e.what());
        }
    });

    Outputs out;
    std::vector<std::pair<std::string, CrossValSummary>> table;
    for (const auto& m : metrics) {
        std::vector<EvalReport> reports;
        for (const auto& job : jobs) {
            if (job.metric != m) continue;
            const int fid = folds[job.fold].fold_id;
            out.add(detail::fold_file("identify", tag(m), fid, "csv"), job.cmc_csv);
            out.add(detail::fold_file("identify", tag(m), fid, "json"), job.report_json);
            reports.push_back(job.report);
        }
        auto summary = aggregate_folds(reports);
        const std::string row_name = m ? std::string(metric_display_name(*m)) : "Class scores";
        nlohmann::ordered_json j;
        j["command"] = "identify";
        j["interpretation"] = identification_interpretation;
        j["metric"] = tag(m);
        j["layer"] = layer_name(cfg.layer);
        j["threshold_policy"] = threshold_policy_name(cfg.threshold_policy);
        j["summary"] = to_json(summary, row_name);
        out.add(detail::summary_file("identify", tag(m)), detail::dump_json(j));
        table.emplace_back(row_name, std::move(summary));
    }
    out.add("identify_summary.csv", summaries_to_csv(table));
    return out;
}

/// Full probe x gallery distance matrix per metric, `dump-scores_{metric}.csv`.
inline Outputs run_dump_scores(const RunConfig& cfg_in) {
    const RunConfig cfg = validate(cfg_in);
    const auto in = detail::load_inputs(cfg, true);
    Outputs out;
    for (auto m : cfg.metrics) {
        std::ostringstream os;
        write_score_matrix_csv(os, score_matrix(in.probes, in.gallery, m, cfg.workers));
        out.add("dump-scores_" + std::string(metric_name(m)) + ".csv", os.str());
    }
    return out;
}

} // namespace bioeval
