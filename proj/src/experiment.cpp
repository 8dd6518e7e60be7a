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

#include "sdpp/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sdpp {

namespace fs = std::filesystem;

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::vector<double> parse_double_list(const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

bool parse_bool(const std::string& value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw std::invalid_argument("config: expected a boolean, got '" + value + "'");
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

int worker_cap() {
  if (const char* env = std::getenv("SDPP_WORKERS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return cap;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Replicas are dispatched in batches of at most `workers` threads; results
// land in slots indexed by replica, so the reduction order is fixed no
// matter how the threads interleave.
std::vector<Trace> run_replicas(const WeightSystem& weights,
                                const ObjectiveSuite& suite,
                                const RunOptions& base, int replicas,
                                const PrivacyBudget* budget) {
  std::vector<Trace> traces(replicas);
  std::vector<std::exception_ptr> errors(replicas);
  const int workers = std::min(worker_cap(), replicas);
  int next = 0;
  while (next < replicas) {
    std::vector<std::thread> batch;
    const int end = std::min(next + workers, replicas);
    for (int r = next; r < end; ++r) {
      batch.emplace_back([&, r] {
        try {
          RunOptions opt = base;
          opt.replica = r;
          traces[r] = run(weights, suite, opt, budget);
        } catch (...) {
          errors[r] = std::current_exception();
        }
      });
    }
    for (auto& t : batch) t.join();
    next = end;
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return traces;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out.good())
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
}

struct Instance {
  NetworkTopology topo;
  WeightSystem weights;
  RidgeInstance ridge;
  ObjectiveSuite suite;
  RunOptions base_options;
};

Instance build_instance(const ExperimentConfig& cfg) {
  Instance inst;
  if (cfg.topology == "sec6") {
    inst.topo = sec6_topology();
  } else if (cfg.topology == "ring") {
    inst.topo = ring_topology(cfg.n);
  } else {
    inst.topo = NetworkTopology::load(cfg.topology);
  }
  require(inst.topo.n == cfg.n,
          "config: n = " + std::to_string(cfg.n) +
              " disagrees with the topology's agent count " +
              std::to_string(inst.topo.n));

  WeightParams params;
  params.c_R = cfg.c_R;
  params.zeta = cfg.zeta;
  params.c_C = cfg.c_C;
  if (!cfg.beta.empty()) {
    require(cfg.beta.size() == 1 ||
                static_cast<int>(cfg.beta.size()) == cfg.n,
            "config: beta needs one entry or one per agent");
    if (cfg.beta.size() == 1) {
      params.beta = Eigen::VectorXd::Constant(cfg.n, cfg.beta[0]);
    } else {
      params.beta = Eigen::Map<const Eigen::VectorXd>(
          cfg.beta.data(), static_cast<Eigen::Index>(cfg.beta.size()));
    }
  }
  inst.weights = WeightSystem::build(inst.topo, params);
  if (!inst.weights.validated())
    throw std::invalid_argument(
        "config: topology fails validation: the pull and push graphs must "
        "each contain a spanning tree with a common root");

  auto [ridge, suite] = generate_ridge(cfg.n, cfg.p, cfg.rho_pen, cfg.seed);
  inst.ridge = std::move(ridge);
  inst.suite = std::move(suite);

  inst.base_options.eta = cfg.eta;
  inst.base_options.horizon = cfg.horizon;
  inst.base_options.seed = cfg.seed;
  inst.base_options.vary_init_across_replicas = cfg.vary_init;
  if (cfg.init == "zero")
    inst.base_options.init = InitKind::kZero;
  else if (cfg.init == "uniform")
    inst.base_options.init = InitKind::kUniform01;
  else
    throw std::invalid_argument("config: init must be 'zero' or 'uniform'");
  require(cfg.eta > 0.0, "config: eta must be positive");
  require(cfg.replicas >= 1, "config: replicas must be at least 1");
  require(cfg.horizon >= 0, "config: iterations must be nonnegative");
  return inst;
}

// Noise-free reference trajectory; feeds the gradient-bound estimate.
Trace reference_run(const Instance& inst) {
  RunOptions opt = inst.base_options;
  opt.record_iterates = true;
  return run(inst.weights, inst.suite, opt, nullptr);
}

std::string metadata_text(const ExperimentConfig& cfg, const Instance& inst,
                          double gradient_bound) {
  std::ostringstream out;
  out << "# experiment metadata (config echo, defaults included)\n"
      << cfg.to_text() << "#\n# derived\n";
  out << "mu " << format_double(inst.suite.mu) << "\nL "
      << format_double(inst.suite.L) << "\ngradient_bound "
      << format_double(gradient_bound) << "\n";
  const Eigen::VectorXd x_foc = closed_form_optimum(inst.ridge);
  const Eigen::VectorXd x_anchor = anchor_form_optimum(inst.ridge);
  out << "x_star_first_order";
  for (int r = 0; r < inst.suite.p; ++r) out << ' ' << format_double(x_foc(r));
  out << "\nx_star_anchor_form";
  for (int r = 0; r < inst.suite.p; ++r)
    out << ' ' << format_double(x_anchor(r));
  out << "\n# the first-order-condition form is the residual reference\n";
  out << "u";
  for (int i = 0; i < inst.weights.n(); ++i)
    out << ' ' << format_double(inst.weights.u()(i));
  out << "\nv";
  for (int i = 0; i < 2 * inst.weights.n(); ++i)
    out << ' ' << format_double(inst.weights.v()(i));
  out << "\n";
  return out.str();
}

EpsilonSummary summarize(double epsilon, double theta_bar,
                         const std::vector<Trace>& traces) {
  EpsilonSummary s;
  s.epsilon = epsilon;
  s.theta_bar = theta_bar;
  const int m = static_cast<int>(traces.size());
  Eigen::VectorXd plateaus(m);
  double final_sum = 0.0;
  for (int r = 0; r < m; ++r) {
    plateaus(r) = plateau_mean(traces[r].residual);
    final_sum += traces[r].residual(traces[r].residual.size() - 1);
  }
  s.plateau = plateaus.mean();
  s.final_residual = final_sum / m;
  if (m > 1) {
    const double var =
        (plateaus.array() - s.plateau).square().sum() / (m - 1);
    s.plateau_stderr = std::sqrt(var / m);
  }
  return s;
}

void write_arm(const fs::path& dir, const std::vector<Trace>& traces) {
  fs::create_directories(dir);
  for (std::size_t r = 0; r < traces.size(); ++r) {
    char name[32];
    std::snprintf(name, sizeof(name), "replica_%03zu.csv", r);
    write_trace_csv((dir / name).string(), traces[r]);
  }
  write_aggregate_csv((dir / "aggregate.csv").string(), traces);
}

void write_analysis(const fs::path& path, const Instance& inst,
                    const ExperimentConfig& cfg, double theta_bar) {
  NormSurrogates norms =
      default_norm_surrogates(inst.weights, cfg.surrogate_margin);
  AnalysisReport report =
      compute_constants(inst.weights, inst.suite, norms, theta_bar, cfg.eta);
  if (report.rho_A < 1.0) steady_state_bounds(report);
  write_text_file(path, report.to_text());
}

}  // namespace

ExperimentConfig ExperimentConfig::sec6_preset() {
  ExperimentConfig cfg;  // defaults already mirror the benchmark study
  cfg.init = "zero";
  return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "topology") topology = value;
  else if (key == "c_R") c_R = std::stod(value);
  else if (key == "zeta") zeta = std::stod(value);
  else if (key == "c_C") c_C = std::stod(value);
  else if (key == "beta") beta = parse_double_list(value);
  else if (key == "n") n = std::stoi(value);
  else if (key == "p") p = std::stoi(value);
  else if (key == "rho_pen") rho_pen = std::stod(value);
  else if (key == "seed") seed = std::stoull(value);
  else if (key == "noise_free") noise_free = parse_bool(value);
  else if (key == "epsilons") epsilons = parse_double_list(value);
  else if (key == "slack") slack = std::stod(value);
  else if (key == "safety_factor") safety_factor = std::stod(value);
  else if (key == "eta") eta = std::stod(value);
  else if (key == "iterations") horizon = std::stoi(value);
  else if (key == "replicas") replicas = std::stoi(value);
  else if (key == "init") init = value;
  else if (key == "vary_init") vary_init = parse_bool(value);
  else if (key == "surrogate_margin") surrogate_margin = std::stod(value);
  else if (key == "out") out_dir = value;
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

void ExperimentConfig::apply(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::invalid_argument("config: malformed line " +
                                    std::to_string(lineno));
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void ExperimentConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  apply(buf.str());
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  cfg.apply(text);
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  ExperimentConfig cfg;
  cfg.apply_file(path);
  return cfg;
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  out << "topology = " << topology << "\n"
      << "c_R = " << format_double(c_R) << "\n"
      << "zeta = " << format_double(zeta) << "\n"
      << "c_C = " << format_double(c_C) << "\n"
      << "beta = " << (beta.empty() ? "0.5" : join(beta)) << "\n"
      << "n = " << n << "\n"
      << "p = " << p << "\n"
      << "rho_pen = " << format_double(rho_pen) << "\n"
      << "seed = " << seed << "\n"
      << "noise_free = " << (noise_free ? 1 : 0) << "\n"
      << "epsilons = " << join(epsilons) << "\n"
      << "slack = " << format_double(slack) << "\n"
      << "safety_factor = " << format_double(safety_factor) << "\n"
      << "eta = " << format_double(eta) << "\n"
      << "iterations = " << horizon << "\n"
      << "replicas = " << replicas << "\n"
      << "init = " << init << "\n"
      << "vary_init = " << (vary_init ? 1 : 0) << "\n"
      << "surrogate_margin = " << format_double(surrogate_margin) << "\n"
      << "out = " << out_dir << "\n";
  return out.str();
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_trace_csv(const std::string& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out.good())
    throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "k,residual,consensus_error,tracking_error\n";
  for (int k = 0; k <= trace.horizon; ++k) {
    out << k << ',' << format_double(trace.residual(k)) << ','
        << format_double(trace.consensus_error(k)) << ','
        << format_double(trace.tracking_error(k)) << '\n';
  }
}

void write_aggregate_csv(const std::string& path,
                         const std::vector<Trace>& traces) {
  if (traces.empty())
    throw std::invalid_argument("aggregate: no traces to aggregate");
  const int K = traces[0].horizon;
  for (const auto& t : traces)
    if (t.horizon != K)
      throw std::invalid_argument("aggregate: traces disagree on horizon");
  const int m = static_cast<int>(traces.size());
  std::ofstream out(path);
  if (!out.good())
    throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "k,residual_mean,residual_std\n";
  for (int k = 0; k <= K; ++k) {
    double sum = 0.0;
    for (const auto& t : traces) sum += t.residual(k);
    const double mean = sum / m;
    double var = 0.0;
    if (m > 1) {
      for (const auto& t : traces) {
        const double d = t.residual(k) - mean;
        var += d * d;
      }
      var /= (m - 1);
    }
    out << k << ',' << format_double(mean) << ','
        << format_double(std::sqrt(var)) << '\n';
  }
}

double plateau_mean(const Eigen::VectorXd& residual, double tail_fraction) {
  require(residual.size() >= 1, "plateau: empty residual series");
  require(tail_fraction > 0.0 && tail_fraction <= 1.0,
          "plateau: tail fraction must lie in (0,1]");
  const Eigen::Index len = residual.size();
  const Eigen::Index tail =
      std::max<Eigen::Index>(1, static_cast<Eigen::Index>(len * tail_fraction));
  return residual.tail(tail).mean();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  Instance inst = build_instance(cfg);
  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);

  ExperimentResult result;
  result.out_dir = cfg.out_dir;

  const Trace reference = reference_run(inst);
  const double C_bound = estimate_gradient_bound(
      inst.suite, reference.iterates, cfg.safety_factor);
  result.gradient_bound = C_bound;

  write_text_file(out_dir / "metadata.txt", metadata_text(cfg, inst, C_bound));
  inst.ridge.save((out_dir / "instance.txt").string());

  if (cfg.noise_free) {
    std::vector<Trace> traces = run_replicas(inst.weights, inst.suite,
                                             inst.base_options, cfg.replicas,
                                             nullptr);
    write_arm(out_dir / "noise_free", traces);
    result.arms.push_back(summarize(0.0, 0.0, traces));
    write_analysis(out_dir / "analysis.txt", inst, cfg, 0.0);
    return result;
  }

  require(!cfg.epsilons.empty(), "config: epsilons must not be empty");
  std::ostringstream budget_report;
  for (double eps : cfg.epsilons) {
    const PrivacyBudget budget =
        calibrate(Eigen::VectorXd::Constant(cfg.n, eps), cfg.horizon, C_bound,
                  cfg.p, cfg.slack);
    std::vector<Trace> traces = run_replicas(
        inst.weights, inst.suite, inst.base_options, cfg.replicas, &budget);
    char arm_name[32];
    std::snprintf(arm_name, sizeof(arm_name), "eps_%g", eps);
    write_arm(out_dir / arm_name, traces);
    result.arms.push_back(summarize(eps, budget.theta_bar(), traces));
    budget_report << "# epsilon = " << format_double(eps) << "\n"
                  << budget.report_text();
    write_analysis(out_dir / arm_name / "analysis.txt", inst, cfg,
                   budget.theta_bar());
  }
  write_text_file(out_dir / "budget.txt", budget_report.str());

  std::ostringstream summary;
  summary << "epsilon,theta_bar,plateau_mean,plateau_stderr,final_residual\n";
  for (const auto& arm : result.arms)
    summary << format_double(arm.epsilon) << ',' << format_double(arm.theta_bar)
            << ',' << format_double(arm.plateau) << ','
            << format_double(arm.plateau_stderr) << ','
            << format_double(arm.final_residual) << '\n';
  write_text_file(out_dir / "summary.csv", summary.str());
  return result;
}

ExperimentResult compare_baseline(const ExperimentConfig& cfg) {
  Instance inst = build_instance(cfg);
  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);

  BaselineWeights baseline =
      build_baseline_weights(inst.topo, cfg.c_R, cfg.c_C);
  const Trace sd_free = run(inst.weights, inst.suite, inst.base_options);
  const Trace base_trace =
      run_baseline_push_pull(baseline, inst.suite, inst.base_options);

  Trace sd_noisy;
  bool have_noisy = false;
  double theta_bar = 0.0;
  if (!cfg.noise_free && !cfg.epsilons.empty()) {
    Trace reference = reference_run(inst);
    const double C_bound = estimate_gradient_bound(
        inst.suite, reference.iterates, cfg.safety_factor);
    const PrivacyBudget budget =
        calibrate(Eigen::VectorXd::Constant(cfg.n, cfg.epsilons.front()),
                  cfg.horizon, C_bound, cfg.p, cfg.slack);
    sd_noisy = run(inst.weights, inst.suite, inst.base_options, &budget);
    theta_bar = budget.theta_bar();
    have_noisy = true;
  }

  std::ostringstream csv;
  csv << "k,residual_decomposed,residual_baseline";
  if (have_noisy) csv << ",residual_decomposed_noisy";
  csv << '\n';
  for (int k = 0; k <= cfg.horizon; ++k) {
    csv << k << ',' << format_double(sd_free.residual(k)) << ','
        << format_double(base_trace.residual(k));
    if (have_noisy) csv << ',' << format_double(sd_noisy.residual(k));
    csv << '\n';
  }
  write_text_file(out_dir / "comparison.csv", csv.str());

  std::ostringstream summary;
  summary << "final residual (decomposed, noise-free): "
          << format_double(sd_free.residual(cfg.horizon)) << "\n"
          << "final residual (baseline push-pull):     "
          << format_double(base_trace.residual(cfg.horizon)) << "\n";
  if (have_noisy)
    summary << "final residual (decomposed, noisy, eps="
            << format_double(cfg.epsilons.front())
            << "): " << format_double(sd_noisy.residual(cfg.horizon))
            << " at theta_bar " << format_double(theta_bar) << "\n";
  write_text_file(out_dir / "comparison_summary.txt", summary.str());

  ExperimentResult result;
  result.out_dir = cfg.out_dir;
  EpsilonSummary free_arm;
  free_arm.plateau = plateau_mean(sd_free.residual);
  free_arm.final_residual = sd_free.residual(cfg.horizon);
  result.arms.push_back(free_arm);
  if (have_noisy) {
    EpsilonSummary noisy_arm;
    noisy_arm.epsilon = cfg.epsilons.front();
    noisy_arm.theta_bar = theta_bar;
    noisy_arm.plateau = plateau_mean(sd_noisy.residual);
    noisy_arm.final_residual = sd_noisy.residual(cfg.horizon);
    result.arms.push_back(noisy_arm);
  }
  return result;
}

void analyze_only(const ExperimentConfig& cfg) {
  Instance inst = build_instance(cfg);
  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);

  const Trace reference = reference_run(inst);
  const double C_bound = estimate_gradient_bound(
      inst.suite, reference.iterates, cfg.safety_factor);
  write_text_file(out_dir / "metadata.txt", metadata_text(cfg, inst, C_bound));

  double theta_bar = 0.0;
  if (!cfg.noise_free && !cfg.epsilons.empty()) {
    std::ostringstream budget_report;
    for (double eps : cfg.epsilons) {
      const PrivacyBudget budget =
          calibrate(Eigen::VectorXd::Constant(cfg.n, eps), cfg.horizon,
                    C_bound, cfg.p, cfg.slack);
      budget_report << "# epsilon = " << format_double(eps) << "\n"
                    << budget.report_text();
      theta_bar = std::max(theta_bar, budget.theta_bar());
    }
    write_text_file(out_dir / "budget.txt", budget_report.str());
  }
  write_analysis(out_dir / "analysis.txt", inst, cfg, theta_bar);
}

}  // namespace sdpp
