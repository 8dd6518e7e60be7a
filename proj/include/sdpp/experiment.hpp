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

#ifndef SDPP_EXPERIMENT_HPP
#define SDPP_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sdpp/analysis.hpp"
#include "sdpp/engine.hpp"

namespace sdpp {

/// Flat key=value experiment description.  Every field has a default and is
/// echoed back into the run metadata, so an emitted run is self-describing
/// and replayable.
struct ExperimentConfig {
  std::string topology = "sec6";  // preset name or edge-list file path
  double c_R = 1.0;
  double zeta = 0.01;
  double c_C = 1.0;
  std::vector<double> beta;  // empty -> 0.5 per agent

  int n = 5;
  int p = 10;
  double rho_pen = 0.01;
  std::uint64_t seed = 1;

  bool noise_free = false;
  std::vector<double> epsilons{1.0, 5.0, 10.0};
  double slack = 1e-6;
  double safety_factor = 2.0;

  double eta = 0.01;
  int horizon = 5000;
  int replicas = 50;
  std::string init = "uniform";  // "uniform" | "zero"
  bool vary_init = false;
  double surrogate_margin = 0.05;

  std::string out_dir = "out";

  /// The benchmark preset: 5 agents, p = 10, eta = 0.01, rho_pen = 0.01,
  /// zeta = 0.01, beta = 0.5, epsilons {1, 5, 10}, 50 replicas, K = 5000,
  /// zero initialization.
  static ExperimentConfig sec6_preset();

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig parse(const std::string& text);
  /// Applies key=value lines on top of the current values, so a file can
  /// hold only the deltas from a preset.
  void apply(const std::string& text);
  void apply_file(const std::string& path);
  void set(const std::string& key, const std::string& value);

  /// Full echo, defaults included.
  std::string to_text() const;
};

/// Mean of the residual tail (last tail_fraction of the rows).
double plateau_mean(const Eigen::VectorXd& residual,
                    double tail_fraction = 0.1);

struct EpsilonSummary {
  double epsilon = 0.0;         // 0 marks the noise-free arm
  double theta_bar = 0.0;
  double plateau = 0.0;         // mean of per-replica plateau values
  double plateau_stderr = 0.0;  // sample std / sqrt(M)
  double final_residual = 0.0;  // mean residual at the last iteration
};

struct ExperimentResult {
  std::vector<EpsilonSummary> arms;
  double gradient_bound = 0.0;
  std::string out_dir;
};

/// Runs M seeded replicas per epsilon (or one noise-free arm), writes
/// per-replica and aggregate residual CSVs, the analysis report, the budget
/// report and the metadata echo under cfg.out_dir.  Throws (and the CLI
/// exits nonzero) naming the violated constraint on invalid input.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Noise-free and noisy runs of the decomposed iteration next to the plain
/// push-pull baseline on an identical instance; writes a side-by-side CSV.
ExperimentResult compare_baseline(const ExperimentConfig& cfg);

/// Analysis + calibration only; no replica study.  Writes analysis.txt,
/// budget.txt and metadata.txt.
void analyze_only(const ExperimentConfig& cfg);

// CSV helpers (deterministic formatting; identical inputs give identical
// bytes).
void write_trace_csv(const std::string& path, const Trace& trace);
void write_aggregate_csv(const std::string& path,
                         const std::vector<Trace>& traces);
std::string format_double(double x);

}  // namespace sdpp

#endif  // SDPP_EXPERIMENT_HPP
