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

// Acceptance suite: every criterion prints one PASS/FAIL line with its
// measured numbers. The exit code is the number of failed criteria.
// Run with a list of criterion numbers to restrict, e.g. `acceptance 7 8`.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "demix/demix.hpp"
#include "oracles.hpp"

using namespace demix;

namespace {

int failures = 0;
std::set<int> selected;

bool enabled(int criterion) {
  return selected.empty() || selected.count(criterion) > 0;
}

void report(int criterion, bool ok, const std::string& what,
            const std::string& detail, double seconds) {
  std::printf("[%s] criterion %2d: %s (%s) [%.1fs]\n", ok ? "PASS" : "FAIL",
              criterion, what.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

FactoredSignal random_factored(const MeasurementEnsemble& ens, Rng& rng) {
  FactoredSignal f;
  for (int i = 0; i < ens.r(); ++i) {
    f.channels.push_back(rng.cnormal_vector(ens.k(i)));
    f.messages.push_back(rng.cnormal_vector(ens.n(i)));
  }
  return f;
}

LiftedSignal random_lifted(const MeasurementEnsemble& ens, Rng& rng) {
  LiftedSignal x = zero_lifted(ens);
  for (auto& b : x.blocks) b = rng.cnormal_matrix(b.rows(), b.cols());
  return x;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// --- criterion 1: adjoint identity ---------------------------------------
void criterion_1() {
  Timer timer;
  Rng rng(1001);
  double worst = 0.0;
  bool ok = true;
  for (int inst = 0; inst < 100; ++inst) {
    int r = 1 + rng.below(4);
    Eigen::Index k = 1 + rng.below(8);
    Eigen::Index n = 1 + rng.below(8);
    Eigen::Index lmin = std::max(k, n);
    Eigen::Index L = lmin + rng.below(static_cast<int>(257 - lmin));
    MeasurementEnsemble ens = make_random_ensemble(L, r, k, n, rng);
    LiftedSignal x = random_lifted(ens, rng);
    Vec y = rng.cnormal_vector(L);
    Cplx lhs = (forward(ens, x).array() * y.array().conjugate()).sum();
    Cplx rhs = inner_f(x, adjoint(ens, y));
    double err = std::abs(lhs - rhs) / (1.0 + norm_f(x) * y.norm());
    worst = std::max(worst, err);
    ok = ok && err <= 1e-10;
  }
  double secs = timer.seconds();
  ok = ok && secs < 5.0;
  report(1, ok, "adjoint identity on 100 random instances",
         fmt("worst relative defect %.2e, limit 1e-10", worst), secs);
}

// --- criterion 2: convolution representation ------------------------------
void criterion_2() {
  Timer timer;
  Rng rng(1002);
  double worst = 0.0;
  for (int L : {2, 8, 64, 257}) {
    for (int pair = 0; pair < 20; ++pair) {
      Vec w = rng.cnormal_vector(L);
      Vec s = rng.cnormal_vector(L);
      Vec fast = circular_convolve(w, s);
      Vec slow = oracles::circular_convolve_direct(w, s);
      worst = std::max(worst, (fast - slow).norm() / slow.norm());
    }
  }
  report(2, worst <= 1e-9, "FFT vs direct circular convolution",
         fmt("worst relative error %.2e over L in {2,8,64,257}", worst),
         timer.seconds());
}

// --- criterion 3: Gaussian moment oracles ---------------------------------
void criterion_3() {
  Timer timer;
  Rng rng(1003);
  const int draws = 100000;
  double worst = 0.0;
  for (int n : {2, 5}) {
    Mat id = Mat::Identity(n, n);
    Vec q = rng.cnormal_vector(n);
    Mat qq = q * q.adjoint();
    Mat sum1 = Mat::Zero(n, n), sum2 = Mat::Zero(n, n);
    for (int d = 0; d < draws; ++d) {
      Vec c = rng.cnormal_vector(n);
      Mat dev = id - c * c.adjoint();
      sum1 += dev * dev;
      sum2 += dev * qq * dev;
    }
    sum1 /= double(draws);
    sum2 /= double(draws);
    worst = std::max(worst,
                     (sum1 - double(n) * id).norm() / (double(n) * id.norm()));
    worst = std::max(worst, (sum2 - q.squaredNorm() * id).norm() /
                                (q.squaredNorm() * id.norm()));
  }
  double secs = timer.seconds();
  report(3, worst <= 0.05 && secs < 30.0,
         "Gaussian moment identities at 1e5 draws, n in {2,5}",
         fmt("worst relative deviation %.3f, limit 0.05", worst), secs);
}

// --- criterion 4: SVT prox oracle ------------------------------------------
void criterion_4() {
  Timer timer;
  Rng rng(1004);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Mat m = rng.cnormal_matrix(2, 2);
    double t = 0.05 + rng.uniform() * 1.2 * op_norm(m);
    Mat via_svd = svt(m, t);
    Mat brute = oracles::prox_nuclear_2x2_brute(m, t);
    worst = std::max(worst, (via_svd - brute).norm());
  }
  report(4, worst <= 1e-4, "svt against the brute-force prox minimizer",
         fmt("worst Frobenius gap %.2e over 50 matrices, limit 1e-4", worst),
         timer.seconds());
}

// --- criterion 5: Wirtinger gradient check ---------------------------------
void criterion_5() {
  Timer timer;
  Rng rng(1005);
  double worst = 0.0;
  for (int inst = 0; inst < 5; ++inst) {
    MeasurementEnsemble ens = make_dft_ensemble(24, 2, 3, 3, rng);
    FactoredSignal truth = random_factored(ens, rng);
    Observation obs{forward(ens, lift(truth)), 0.0};
    for (int point = 0; point < 20; ++point) {
      FactoredSignal p = random_factored(ens, rng);
      auto [gh, gx] = gradients(ens, obs, p.channels, p.messages);
      const double step = 1e-5;
      double num = 0.0, den = 0.0;
      auto fd_check = [&](std::vector<Vec>& target, std::vector<Vec>& grad) {
        for (std::size_t i = 0; i < target.size(); ++i)
          for (Eigen::Index j = 0; j < target[i].size(); ++j) {
            Cplx orig = target[i][j];
            auto eval = [&](Cplx v) {
              target[i][j] = v;
              double f = objective(ens, obs, p.channels, p.messages);
              target[i][j] = orig;
              return f;
            };
            double re = (eval(orig + step) - eval(orig - step)) / (4.0 * step);
            double im = (eval(orig + Cplx(0, step)) -
                         eval(orig - Cplx(0, step))) /
                        (4.0 * step);
            Cplx fd(re, im);
            num += std::norm(grad[i][j] - fd);
            den += std::norm(grad[i][j]);
          }
      };
      fd_check(p.channels, gh);
      fd_check(p.messages, gx);
      worst = std::max(worst, std::sqrt(num / den));
    }
  }
  report(5, worst <= 1e-6, "gradients vs central finite differences",
         fmt("worst relative error %.2e over 5x20 points, limit 1e-6", worst),
         timer.seconds());
}

// --- criterion 6: noiseless convex recovery --------------------------------
void criterion_6() {
  Timer timer;
  int good = 0;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    Rng rng(mix_seed({1006, (std::uint64_t)t}));
    MeasurementEnsemble ens = make_dft_ensemble(96, 2, 4, 4, rng);
    FactoredSignal truth = random_factored(ens, rng);
    LiftedSignal x0 = lift(truth);
    Observation obs{forward(ens, x0), 0.0};
    SolverResult res = solve_nuclear(ens, obs);
    double rel = norm_f(res.estimate - x0) / norm_f(x0);
    worst = std::max(worst, rel);
    good += rel <= 1e-3;
  }
  double secs = timer.seconds();
  report(6, good >= 19 && secs < 300.0,
         "noiseless convex recovery r=2 K=N=4 L=96",
         fmt("%d/20 trials below 1e-3 (worst %.2e), need 19", good, worst),
         secs);
}

// --- criteria 7/8: phase transitions ---------------------------------------
struct SweepSummary {
  std::vector<double> rho;
  std::vector<double> rate;
};

SweepSummary run_sweep(SolverKind solver, std::vector<double> grid,
                       int trials, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.r = 4;
  cfg.k = 8;
  cfg.n = 8;
  cfg.rho_grid = std::move(grid);
  cfg.trials_per_point = trials;
  cfg.solver = solver;
  cfg.master_seed = seed;
  PhaseTransitionTable table = phase_transition_sweep(cfg);
  SweepSummary s;
  for (const auto& row : table.rows) {
    s.rho.push_back(row.rho);
    s.rate.push_back(row.success_rate.value_or(0.0));
  }
  return s;
}

// Linear interpolation of the last upward 50% crossing.
double crossing_50(const SweepSummary& s) {
  for (std::size_t i = s.rate.size(); i-- > 1;) {
    if (s.rate[i] >= 0.5 && s.rate[i - 1] < 0.5) {
      double t = (0.5 - s.rate[i - 1]) / (s.rate[i] - s.rate[i - 1]);
      return s.rho[i - 1] + t * (s.rho[i] - s.rho[i - 1]);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string rates_string(const SweepSummary& s) {
  std::string out;
  for (std::size_t i = 0; i < s.rho.size(); ++i)
    out += fmt("%.2f:%.2f ", s.rho[i], s.rate[i]);
  return out;
}

void criterion_7() {
  Timer timer;
  std::vector<double> grid = {2.0, 2.25, 2.5, 2.75, 3.0, 3.25, 3.5};
  SweepSummary full = run_sweep(SolverKind::Convex, grid, 50, 2026);
  double cross = crossing_50(full);
  bool ok = full.rate.front() < 0.25 && full.rate.back() > 0.75 &&
            std::isfinite(cross) && cross >= 2.25 && cross <= 3.25;
  SweepSummary smoke = run_sweep(SolverKind::Convex, grid, 10, 331);
  bool smoke_ok = smoke.rate.front() < 0.25 && smoke.rate.back() > 0.75;
  std::string diag;
  if (!ok) {
    // the stated bracket failed; locate the actual crossing below the grid
    SweepSummary low =
        run_sweep(SolverKind::Convex, {1.25, 1.5, 1.75, 2.0}, 10, 472);
    diag = fmt("; measured transition below the stated grid: [%s]",
               rates_string(low).c_str());
  }
  double secs = timer.seconds();
  report(7, ok && smoke_ok && secs < 7200.0,
         "convex phase transition r=4 K=N=8",
         fmt("rates [%s], 50%% crossing %.2f vs stated [2.25,3.25]; smoke"
             " bracket %s%s",
             rates_string(full).c_str(), cross, smoke_ok ? "holds" : "FAILS",
             diag.c_str()),
         secs);
}

void criterion_8() {
  Timer timer;
  std::vector<double> grid = {0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
  SweepSummary s = run_sweep(SolverKind::Wirtinger, grid, 50, 2027);
  double cross = crossing_50(s);
  double secs = timer.seconds();
  bool ok = std::isfinite(cross) && cross >= 1.0 && cross <= 1.5 &&
            secs < 1200.0;
  report(8, ok, "Wirtinger phase transition r=4 K=N=8",
         fmt("rates [%s], 50%% crossing %.2f in [1.0,1.5]",
             rates_string(s).c_str(), cross),
         secs);
}

// --- criteria 9/10: Golfing decay and dual certificate ----------------------
void criteria_9_10() {
  Timer timer;
  // Decimated DFT partition at K = N = 4, r = 2: K_mu = 4 and, with
  // S = Id, mu_h^2 <= K_mu = 4, so Q = 2560 >= 64 r (K_mu + N mu_h^2)
  // holds for every draw of the channels. P = 4 sits in the
  // admissibility bracket at L = 10240.
  const int trials = 50;
  const Eigen::Index L = 10240;
  int decay_ok = 0, mu_ok = 0, cond_ok = 0;
  bool z_ok = true;
  double worst_z = 0.0;
  const double sqrt_r = std::sqrt(2.0);
  for (int t = 0; t < trials; ++t) {
    Rng rng(mix_seed({1009, (std::uint64_t)t}));
    MeasurementEnsemble ens = make_dft_ensemble(L, 2, 4, 4, rng);
    FactoredSignal truth = random_factored(ens, rng);
    Partition part = construct_partition(ens, 4, 1.0 / 32.0, true, rng);
    GolfingTrace trace = golfing_run(ens, truth, part);

    bool decay = true;
    for (std::size_t p = 0; p < trace.w_norms.size(); ++p)
      decay = decay &&
              trace.w_norms[p] <= std::pow(4.0, -double(p)) * sqrt_r + 1e-12;
    decay_ok += decay;

    bool mu_dec = true;
    for (std::size_t p = 1; p < trace.mu_seq.size(); ++p)
      mu_dec = mu_dec && trace.mu_seq[p] <= 0.25 * trace.mu_seq[p - 1] + 1e-12;
    mu_ok += mu_dec;

    Rng prng(mix_seed({77, (std::uint64_t)t}));
    double gamma = operator_norm_estimate(ens, 30, prng);
    DualConditionReport rep = verify_dual_conditions(trace, gamma);
    bool conds = rep.cond1_ok && rep.cond2_ok;
    cond_ok += conds;
    if (conds) {
      worst_z = std::max(worst_z, trace.z_norm);
      z_ok = z_ok && trace.z_norm <= 10.0 * sqrt_r;
    }
  }
  double secs = timer.seconds();
  if (enabled(9))
    report(9, decay_ok >= 45 && mu_ok >= 45,
           "Golfing residual and mu decay (50 trials)",
           fmt("||W_p|| <= 4^-p sqrt(r) in %d/50, mu_p <= mu_{p-1}/4 in %d/50,"
               " need 45",
               decay_ok, mu_ok),
           secs);
  if (enabled(10))
    report(10, cond_ok >= 45 && z_ok,
           "dual-certificate conditions (50 trials)",
           fmt("alpha & beta conditions in %d/50 (need 45), worst passing"
               " ||z|| %.2f vs 10 sqrt(r) = %.2f",
               cond_ok, worst_z, 10.0 * sqrt_r),
           secs);
}

// --- criterion 11: local isometry -------------------------------------------
void criterion_11() {
  Timer timer;
  const int trials = 50;
  int good = 0;
  double worst_lo = 1.0, worst_hi = 1.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(mix_seed({1011, (std::uint64_t)t}));
    MeasurementEnsemble ens = make_dft_ensemble(1024, 2, 4, 4, rng);
    FactoredSignal truth = random_factored(ens, rng);
    TangentFrame frame = make_tangent_frame(truth);
    IsometrySpectrum spec = local_isometry_spectrum(ens, frame);
    worst_lo = std::min(worst_lo, spec.min_eig);
    worst_hi = std::max(worst_hi, spec.max_eig);
    good += spec.min_eig >= 0.75 && spec.max_eig <= 1.25;
  }
  report(11, good >= 45, "local isometry on T at L = 64 r (K+N)",
         fmt("eigenvalues in [0.75,1.25] in %d/50 (need 45); extremes"
             " [%.3f, %.3f]",
             good, worst_lo, worst_hi),
         timer.seconds());
}

// --- criterion 12: operator norm vs the probabilistic bound -----------------
void criterion_12() {
  Timer timer;
  const int ensembles = 100;
  int under = 0;
  double worst = 0.0;
  for (int t = 0; t < ensembles; ++t) {
    Rng rng(mix_seed({1012, (std::uint64_t)t}));
    MeasurementEnsemble ens = make_dft_ensemble(128, 4, 8, 8, rng);
    Rng prng(mix_seed({1013, (std::uint64_t)t}));
    double gamma = operator_norm_estimate(ens, 30, prng);
    double bound = 2.0 * std::sqrt(
                             std::max(1.0, 4.0 * 8.0 * 8.0 * 8.0 / 128.0) *
                             std::log2(128.0 + 4.0 * 64.0));
    worst = std::max(worst, gamma / bound);
    under += gamma <= bound;
  }
  report(12, under >= 95, "power-iteration norm under the omega=1 bound",
         fmt("gamma under bound in %d/100 (need 95), worst ratio %.3f", under,
             worst),
         timer.seconds());
}

// --- criterion 13: noise scaling ---------------------------------------------
void criterion_13() {
  Timer timer;
  ExperimentConfig cfg;
  cfg.r = 2;
  cfg.k = 4;
  cfg.n = 4;
  cfg.master_seed = 1014;
  cfg.trials_per_point = 8;
  NoiseTable table =
      noise_scaling_study(cfg, {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}, 128);
  // least-squares slope of log(mean error) against log(tau)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = static_cast<int>(table.rows.size());
  for (const auto& row : table.rows) {
    double x = std::log(row.tau), y = std::log(row.mean_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  std::string errs;
  for (const auto& row : table.rows) errs += fmt("%.2e ", row.mean_error);
  report(13, slope >= 0.9 && slope <= 1.1, "noise scaling of the convex solver",
         fmt("log-log slope %.3f in [0.9,1.1]; mean errors [%s]", slope,
             errs.c_str()),
         timer.seconds());
}

// --- criterion 14: partition admissibility -----------------------------------
void criterion_14() {
  Timer timer;
  // First clause: random orthonormal bases at L=1024, P=4, K=4, nu=1/32.
  int seeds_ok = 0;
  double best_nu_overall = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 20; ++s) {
    Rng rng(mix_seed({1015, (std::uint64_t)s}));
    MeasurementEnsemble ens = make_random_ensemble(1024, 1, 4, 1, rng);
    try {
      Partition part = construct_partition(ens, 4, 1.0 / 32.0, false, rng, 50);
      best_nu_overall = std::min(best_nu_overall, part.nu_achieved);
      ++seeds_ok;
    } catch (const ConstructionError& e) {
      best_nu_overall = std::min(best_nu_overall, e.best_nu);
    }
  }
  bool random_ok = seeds_ok >= 19;

  // Second clause: the decimated shortcut is exact whenever K <= Q.
  bool dft_ok = true;
  double worst_nu = 0.0;
  for (auto [L, P, K] : std::vector<std::array<int, 3>>{
           {64, 4, 8}, {64, 4, 16}, {256, 8, 32}, {1024, 4, 4}, {128, 2, 64}}) {
    Rng rng(7);
    MeasurementEnsemble ens = make_dft_ensemble(L, 1, K, 2, rng);
    Partition part = construct_partition(ens, P, 1.0 / 32.0, true, rng);
    worst_nu = std::max(worst_nu, part.nu_achieved);
    dft_ok = dft_ok && part.nu_achieved <= 1e-12;
  }
  report(14, random_ok && dft_ok, "partition admissibility",
         fmt("random-basis construction succeeded in %d/20 seeds (need 19,"
             " best nu seen %.4f vs target %.4f); decimated-DFT worst nu"
             " %.1e",
             seeds_ok, best_nu_overall, 1.0 / 32.0, worst_nu),
         timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  if (enabled(1)) criterion_1();
  if (enabled(2)) criterion_2();
  if (enabled(3)) criterion_3();
  if (enabled(4)) criterion_4();
  if (enabled(5)) criterion_5();
  if (enabled(6)) criterion_6();
  if (enabled(7)) criterion_7();
  if (enabled(8)) criterion_8();
  if (enabled(9) || enabled(10)) criteria_9_10();
  if (enabled(11)) criterion_11();
  if (enabled(12)) criterion_12();
  if (enabled(13)) criterion_13();
  if (enabled(14)) criterion_14();

  std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
