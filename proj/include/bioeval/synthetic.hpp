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

// Synthetic template sets for demos and tests: each subject has a latent
// centre; a template is the rectified centre plus per-sample noise (fc layer)
// or a softmax over noisy class logits (score layer).

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bioeval/templates.hpp"

namespace bioeval::synthetic {

struct Params {
    std::size_t subjects = 8;
    std::size_t sessions = 4;
    std::size_t dimension = 32;  // fc layer only; score layer uses `subjects`
    double noise = 0.35;         // fc: per-feature noise std relative to centre spread
    double logit_gap = 3.0;      // score: true-class logit boost
    std::string source = "real";
    std::uint64_t seed = 1;
};

inline std::string subject_id(std::size_t i) {
    std::string s = std::to_string(i + 1);
    return "P" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

inline std::string session_id(std::size_t i) { return "S" + std::to_string(i + 1); }

inline TemplateSet make(const Params& p, Layer layer) {
    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<FeatureTemplate> out;

    if (layer == Layer::fc) {
        std::vector<std::vector<double>> centre(p.subjects, std::vector<double>(p.dimension));
        for (auto& c : centre)
            for (auto& v : c) v = std::abs(normal(rng)) + 0.2;
        for (std::size_t sess = 0; sess < p.sessions; ++sess)
            for (std::size_t s = 0; s < p.subjects; ++s) {
                FeatureTemplate t{subject_id(s), session_id(sess), p.source, Layer::fc, {}};
                t.features.resize(p.dimension);
                for (std::size_t i = 0; i < p.dimension; ++i)
                    t.features[i] = std::max(0.0, centre[s][i] + p.noise * normal(rng));
                out.push_back(std::move(t));
            }
    } else {
        for (std::size_t sess = 0; sess < p.sessions; ++sess)
            for (std::size_t s = 0; s < p.subjects; ++s) {
                std::vector<double> logits(p.subjects);
                for (std::size_t k = 0; k < p.subjects; ++k) logits[k] = normal(rng) + (k == s ? p.logit_gap : 0.0);
                double mx = logits[0];
                for (double l : logits) mx = std::max(mx, l);
                double z = 0.0;
                for (double& l : logits) z += (l = std::exp(l - mx));
                for (double& l : logits) l /= z;
                out.push_back({subject_id(s), session_id(sess), p.source, Layer::score, std::move(logits)});
            }
    }
    return TemplateSet::create(std::move(out));
}

} // namespace bioeval::synthetic
