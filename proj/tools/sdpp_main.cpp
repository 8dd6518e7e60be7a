// Copyright 2026 The sdpushpull Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "sdpp/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "sdpp: differentially private push-pull gradient tracking over "
      "directed graphs: Monte-Carlo experiment driver"};

  std::string config_path;
  std::string preset;
  bool noise_free = false;
  bool analyze = false;
  bool baseline = false;
  std::uint64_t seed = 0;
  int replicas = 0;
  std::string out_dir;

  app.add_option("--config", config_path, "flat key=value config file");
  app.add_option("--preset", preset,
                 "named preset ('sec6': 5 agents, p=10, eta=0.01)");
  app.add_flag("--noise-free", noise_free, "run without privacy noise");
  app.add_option("--seed", seed, "override the master seed");
  app.add_option("--replicas", replicas, "override the replica count");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--analyze-only", analyze,
               "emit the analysis and budget reports without simulating");
  app.add_flag("--compare-baseline", baseline,
               "run the decomposed iteration next to plain push-pull");

  CLI11_PARSE(app, argc, argv);

  try {
    sdpp::ExperimentConfig cfg;
    if (!preset.empty()) {
      if (preset != "sec6")
        throw std::invalid_argument("unknown preset '" + preset + "'");
      cfg = sdpp::ExperimentConfig::sec6_preset();
    }
    // Preset first, file on top: the file only needs the deltas.
    if (!config_path.empty()) cfg.apply_file(config_path);
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--replicas")) cfg.replicas = replicas;
    if (noise_free) cfg.noise_free = true;
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    if (analyze) {
      sdpp::analyze_only(cfg);
      std::printf("analysis written to %s\n", cfg.out_dir.c_str());
      return 0;
    }
    if (baseline) {
      sdpp::compare_baseline(cfg);
      std::printf("comparison written to %s\n", cfg.out_dir.c_str());
      return 0;
    }
    sdpp::ExperimentResult result = sdpp::run_experiment(cfg);
    for (const auto& arm : result.arms) {
      if (arm.epsilon > 0.0)
        std::printf("eps=%-6g theta_bar=%-12g plateau=%-12g (stderr %g)\n",
                    arm.epsilon, arm.theta_bar, arm.plateau,
                    arm.plateau_stderr);
      else
        std::printf("noise-free: final residual %g\n", arm.final_residual);
    }
    std::printf("outputs written to %s\n", cfg.out_dir.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
