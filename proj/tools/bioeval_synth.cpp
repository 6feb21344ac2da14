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

// Writes a synthetic template file (both layers) for trying out bioeval.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bioeval/synthetic.hpp"
#include "bioeval/template_io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate synthetic biometric templates"};
    bioeval::synthetic::Params p;
    std::string out_path, format = "jsonl";
    app.add_option("-o,--output", out_path, "Output file")->required();
    app.add_option("--format", format, "jsonl or csv")->capture_default_str();
    app.add_option("--subjects", p.subjects)->capture_default_str();
    app.add_option("--sessions", p.sessions)->capture_default_str();
    app.add_option("--dimension", p.dimension, "fc feature dimension")->capture_default_str();
    app.add_option("--noise", p.noise)->capture_default_str();
    app.add_option("--source", p.source)->capture_default_str();
    app.add_option("--seed", p.seed)->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        auto fmt = bioeval::parse_template_format(format);
        if (!fmt) throw std::runtime_error("unknown format '" + format + "'");
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + out_path);
        // CSV holds a single dimension, so it only gets the fc layer.
        bioeval::write_templates(out, bioeval::synthetic::make(p, bioeval::Layer::fc), *fmt);
        if (*fmt == bioeval::TemplateFormat::jsonl) {
            auto q = p;
            q.seed = p.seed + 1;
            bioeval::write_templates(out, bioeval::synthetic::make(q, bioeval::Layer::score), *fmt);
        }
    } catch (const std::exception& e) {
        std::cerr << "bioeval-synth: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
