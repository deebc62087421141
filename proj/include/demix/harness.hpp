// Copyright 2026 The Demix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEMIX_HARNESS_HPP
#define DEMIX_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "demix/coherence.hpp"
#include "demix/convex.hpp"
#include "demix/operators.hpp"
#include "demix/wirtinger.hpp"

namespace demix {

enum class SolverKind { Convex, Wirtinger, Both };

inline std::string solver_name(SolverKind s) {
  switch (s) {
    case SolverKind::Convex:
      return "convex";
    case SolverKind::Wirtinger:
      return "wirtinger";
    default:
      return "both";
  }
}

/// Experiment description: equal channel/message dimensions across the r
/// blocks, a grid of oversampling ratios rho = L / (r (K + N)), and the
/// trial protocol. Ground truth is drawn i.i.d. CN(0,1), un-normalized.
struct ExperimentConfig {
  int r = 4;
  int k = 8;
  int n = 8;
  std::vector<double> rho_grid;
  int trials_per_point = 50;
  SolverKind solver = SolverKind::Wirtinger;
  double tau = 0.0;
  std::uint64_t master_seed = 0;
  double omega = 1.0;
  ConvexConfig convex;
  WirtingerConfig wirtinger;
};

/// L = round(rho * r * (K + N)), floored at max(K, N).
inline Eigen::Index l_for_rho(const ExperimentConfig& cfg, double rho) {
  if (rho <= 0.0) throw DimensionError("rho must be positive");
  auto L = static_cast<Eigen::Index>(
      std::llround(rho * cfg.r * (cfg.k + cfg.n)));
  return std::max<Eigen::Index>(L, std::max(cfg.k, cfg.n));
}

/// Per-block success at the 1% relative threshold, evaluated on the
/// lifted matrices so the scaling ambiguity cancels.
inline std::vector<bool> success(const LiftedSignal& estimate,
                                 const LiftedSignal& truth,
                                 double threshold = 0.01) {
  if (estimate.r() != truth.r())
    throw DimensionError("success: block count mismatch");
  std::vector<bool> ok;
  for (int i = 0; i < truth.r(); ++i) {
    double denom = truth.blocks[i].norm();
    if (denom == 0.0)
      throw UndefinedRatioError("success: zero truth block");
    ok.push_back((estimate.blocks[i] - truth.blocks[i]).norm() <=
                 threshold * denom);
  }
  return ok;
}

struct TrialResult {
  SolverKind solver = SolverKind::Convex;
  double rho = 0.0;
  int trial_index = 0;
  Eigen::Index L = 0;
  std::vector<bool> block_success;
  int iterations = 0;
  double relative_error = 0.0;  // lifted, over the whole tuple
  double absolute_error = 0.0;  // ||Xhat - X0||_F
  SolveStatus status = SolveStatus::MaxIters;
  double seconds = 0.0;  // informational only, excluded from determinism
};

/// One deterministic trial: the stream is a pure function of
/// (master_seed, solver, rho, trial_index); a fresh partial-DFT ensemble,
/// i.i.d. CN ground truth and encoders, noise of norm tau.
inline TrialResult run_trial(const ExperimentConfig& cfg, SolverKind solver,
                             double rho, int trial_index) {
  if (solver == SolverKind::Both)
    throw DimensionError("run_trial: pick one solver per trial");
  const Eigen::Index L = l_for_rho(cfg, rho);
  Rng rng(mix_seed({cfg.master_seed,
                    static_cast<std::uint64_t>(solver == SolverKind::Convex ? 1 : 2),
                    double_bits(rho), static_cast<std::uint64_t>(trial_index)}));
  MeasurementEnsemble ens = make_dft_ensemble(L, cfg.r, cfg.k, cfg.n, rng);
  FactoredSignal truth;
  for (int i = 0; i < cfg.r; ++i) {
    truth.channels.push_back(rng.cnormal_vector(cfg.k));
    truth.messages.push_back(rng.cnormal_vector(cfg.n));
  }
  Observation obs = synthesize_observation(ens, truth, cfg.tau, rng);
  LiftedSignal x0 = lift(truth);

  TrialResult out;
  out.solver = solver;
  out.rho = rho;
  out.trial_index = trial_index;
  out.L = L;

  auto start = std::chrono::steady_clock::now();
  LiftedSignal estimate;
  if (solver == SolverKind::Convex) {
    SolverResult res = solve_nuclear(ens, obs, cfg.convex);
    estimate = std::move(res.estimate);
    out.iterations = res.iterations;
    out.status = res.status;
  } else {
    WirtingerResult res = solve_wirtinger(ens, obs, cfg.wirtinger);
    estimate = std::move(res.estimate);
    out.iterations = res.iterations;
    out.status = res.status;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start)
                    .count();
  out.block_success = success(estimate, x0);
  out.absolute_error = norm_f(estimate - x0);
  out.relative_error = out.absolute_error / norm_f(x0);
  return out;
}

/// One sweep row. `trials` counts device-trials (trials_per_point * r):
/// success aggregation is per device, never all-or-nothing per trial.
struct PhaseTransitionRow {
  SolverKind solver = SolverKind::Convex;
  int r = 0;
  int k = 0;
  int n = 0;
  Eigen::Index L = 0;
  double rho = 0.0;
  int trials = 0;
  int successes = 0;
  std::optional<double> success_rate;
  double mean_iterations = 0.0;
  double mean_seconds = 0.0;
};

struct PhaseTransitionTable {
  std::vector<PhaseTransitionRow> rows;
};

namespace detail {

/// Runs fn(0..count-1) on a small thread pool; results land in caller-
/// provided slots so ordering is deterministic.
template <typename Fn>
void parallel_for(int count, Fn&& fn) {
  unsigned workers = std::min<unsigned>(std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(count));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline PhaseTransitionRow aggregate_rows(const ExperimentConfig& cfg,
                                         SolverKind solver, double rho,
                                         const std::vector<TrialResult>& trials) {
  PhaseTransitionRow row;
  row.solver = solver;
  row.r = cfg.r;
  row.k = cfg.k;
  row.n = cfg.n;
  row.L = l_for_rho(cfg, rho);
  row.rho = rho;
  row.trials = static_cast<int>(trials.size()) * cfg.r;
  for (const auto& t : trials) {
    for (bool ok : t.block_success) row.successes += ok;
    row.mean_iterations += t.iterations;
    row.mean_seconds += t.seconds;
  }
  if (!trials.empty()) {
    row.mean_iterations /= static_cast<double>(trials.size());
    row.mean_seconds /= static_cast<double>(trials.size());
    row.success_rate =
        static_cast<double>(row.successes) / static_cast<double>(row.trials);
  }
  return row;
}

}  // namespace detail

/// Success rates over the rho grid, trials running in parallel with
/// independent derived streams. Rows are ordered by (solver, rho, trial)
/// regardless of execution order. solver = Both emits both row groups.
inline PhaseTransitionTable phase_transition_sweep(const ExperimentConfig& cfg) {
  if (cfg.rho_grid.empty())
    throw DimensionError("phase_transition_sweep: empty rho grid");
  std::vector<SolverKind> solvers;
  if (cfg.solver == SolverKind::Both)
    solvers = {SolverKind::Convex, SolverKind::Wirtinger};
  else
    solvers = {cfg.solver};

  PhaseTransitionTable table;
  for (SolverKind solver : solvers) {
    for (double rho : cfg.rho_grid) {
      std::vector<TrialResult> trials(
          static_cast<std::size_t>(std::max(cfg.trials_per_point, 0)));
      detail::parallel_for(static_cast<int>(trials.size()), [&](int t) {
        trials[static_cast<std::size_t>(t)] = run_trial(cfg, solver, rho, t);
      });
      table.rows.push_back(detail::aggregate_rows(cfg, solver, rho, trials));
    }
  }
  return table;
}

struct NoiseRow {
  double tau = 0.0;
  double mean_error = 0.0;          // mean ||Xhat - X0||_F over trials
  double theorem_bound_value = 0.0; // C_fit * tau * geometry factor
};

struct NoiseTable {
  std::vector<NoiseRow> rows;
  double fitted_constant = 0.0;
  double geometry_factor = 0.0;  // sqrt(r max{1, r K_mu N / L} log2 L)
};

/// Mean convex-recovery error per tau, against the reference envelope
/// C * tau * sqrt(r max{1, r K_mu N / L} log2 L) with C fitted at the
/// smallest tau and then fixed.
inline NoiseTable noise_scaling_study(const ExperimentConfig& cfg,
                                      std::vector<double> tau_grid,
                                      Eigen::Index L) {
  if (tau_grid.empty())
    throw DimensionError("noise_scaling_study: empty tau grid");
  std::sort(tau_grid.begin(), tau_grid.end());
  const int trials = std::max(cfg.trials_per_point, 1);

  // the solver's accuracy floor must sit well below the smallest tau for
  // the tau-scaling to be visible
  ExperimentConfig tight = cfg;
  tight.convex.tol_rel = std::min(cfg.convex.tol_rel, 1e-9);
  tight.convex.max_iters = std::max(cfg.convex.max_iters, 20000);

  NoiseTable table;
  const double kmu = static_cast<double>(cfg.k);  // partial-DFT bases
  table.geometry_factor = std::sqrt(
      cfg.r *
      std::max(1.0, cfg.r * kmu * cfg.n / static_cast<double>(L)) *
      std::log2(static_cast<double>(L)));

  const double rho = static_cast<double>(L) / (cfg.r * (cfg.k + cfg.n));
  for (double tau : tau_grid) {
    ExperimentConfig point = tight;
    point.tau = tau;
    std::vector<double> errors(static_cast<std::size_t>(trials));
    detail::parallel_for(trials, [&](int t) {
      TrialResult res = run_trial(point, SolverKind::Convex, rho, t);
      errors[static_cast<std::size_t>(t)] = res.absolute_error;
    });
    NoiseRow row;
    row.tau = tau;
    for (double e : errors) row.mean_error += e / trials;
    table.rows.push_back(row);
  }
  table.fitted_constant =
      table.rows.front().mean_error /
      (table.rows.front().tau * table.geometry_factor);
  for (auto& row : table.rows)
    row.theorem_bound_value =
        table.fitted_constant * row.tau * table.geometry_factor;
  return table;
}

}  // namespace demix

#endif  // DEMIX_HARNESS_HPP
