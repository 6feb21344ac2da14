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

// bioeval: template matching and verification/identification evaluation.
//
//   bioeval verify      --probe P [--gallery G] --metric dice|...|all --output-dir D
//   bioeval identify    --probe P [--gallery G] --layer fc|score ...
//   bioeval dump-scores --probe P [--gallery G] --metric M
//   bioeval folds       --probe P
//
// Options may also come from `--config FILE` (key=value lines, keys are the long
// option names). Command-line flags take precedence over the file.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bioeval/pipeline.hpp"

namespace {

template <typename T, typename Parse>
T parse_or_throw(const std::string& s, Parse parse, const char* what) {
    auto v = parse(s);
    if (!v) throw bioeval::ConfigError(std::string("invalid ") + what + " '" + s + "'");
    return *v;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Biometric template matching and evaluation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value configuration file; command-line flags override it");

    std::string probe, gallery, validation, roster, metric = "dice", layer = "fc", fusion = "min";
    std::string policy = "per-set", output_dir = ".";
    std::vector<double> far_targets{0.01, 0.001};
    std::vector<std::size_t> ranks{1};
    bool normalize = false, clamp = false;
    unsigned workers = 1;

    app.add_option("--probe", probe, "Probe template file (.jsonl or .csv)");
    app.add_option("--gallery", gallery, "Gallery template file (defaults to the probe file)");
    app.add_option("--validation", validation, "Validation probe file for transfer-from-validation thresholds");
    app.add_option("--roster", roster, "Subject roster for score-layer identification, one id per line");
    app.add_option("--metric", metric, "Distance metric name or 'all'")->capture_default_str();
    app.add_option("--layer", layer, "Template layer: fc or score")->capture_default_str();
    app.add_flag("--normalize", normalize, "L1-normalize every template before matching");
    app.add_flag("--clamp", clamp, "Clamp negative feature values to 0 instead of rejecting them");
    app.add_option("--fusion", fusion, "Multi-template gallery fusion: min or mean")->capture_default_str();
    app.add_option("--far-targets", far_targets, "Target FAR values in (0,1)")->delimiter(',')->capture_default_str();
    app.add_option("--ranks", ranks, "CMC ranks reported for identification")->delimiter(',')->capture_default_str();
    app.add_option("--output-dir", output_dir, "Directory for report files")->capture_default_str();
    app.add_option("--threshold-policy", policy, "per-set or transfer-from-validation")->capture_default_str();
    app.add_option("--workers", workers, "Worker threads")->capture_default_str();

    auto* verify = app.add_subcommand("verify", "1:1 verification: ROC, TAR@FAR, EER, AUC per fold and metric");
    auto* identify = app.add_subcommand("identify", "1:N identification: CMC, rank-k, TAR@FAR per fold");
    auto* dump = app.add_subcommand("dump-scores", "Write the full probe x gallery distance matrix");
    auto* folds = app.add_subcommand("folds", "Print the session-based fold partition");
    for (auto* sub : {verify, identify, dump, folds}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        bioeval::RunConfig cfg;
        cfg.probe_path = probe;
        if (!gallery.empty()) cfg.gallery_path = gallery;
        if (!validation.empty()) cfg.validation_path = validation;
        if (!roster.empty()) cfg.roster_path = roster;
        cfg.metrics = bioeval::parse_metric_selection(metric);
        cfg.layer = parse_or_throw<bioeval::Layer>(layer, bioeval::parse_layer, "layer");
        cfg.fusion = parse_or_throw<bioeval::Fusion>(fusion, bioeval::parse_fusion, "fusion");
        cfg.threshold_policy =
            parse_or_throw<bioeval::ThresholdPolicy>(policy, bioeval::parse_threshold_policy, "threshold policy");
        cfg.normalize = normalize;
        cfg.clamp = clamp;
        cfg.far_targets = far_targets;
        cfg.ranks = ranks;
        cfg.output_dir = output_dir;
        cfg.workers = workers;

        if (folds->parsed()) {
            std::cout << bioeval::run_folds(bioeval::validate(cfg));
            return 0;
        }
        bioeval::Outputs out;
        if (verify->parsed()) out = bioeval::run_verify(cfg);
        else if (identify->parsed()) out = bioeval::run_identify(cfg);
        else out = bioeval::run_dump_scores(cfg);
        bioeval::commit_outputs(out, cfg.output_dir);
        for (const auto& [name, contents] : out.files) std::cout << (cfg.output_dir / name).string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "bioeval: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
