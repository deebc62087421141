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

#ifndef DEMIX_CONVEX_HPP
#define DEMIX_CONVEX_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "demix/operators.hpp"
#include "demix/types.hpp"

namespace demix {

/// Singular value thresholding, the proximal operator of t ||.||_*:
/// U shrink(Sigma, t) V* with shrink flooring at zero.
inline Mat svt(const Mat& m, double threshold) {
  if (threshold < 0.0) throw DimensionError("svt: threshold must be >= 0");
  if (!m.allFinite()) throw NumericError("svt: non-finite input");
  if (threshold == 0.0) return m;
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    sv[i] = std::max(sv[i] - threshold, 0.0);
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().adjoint();
}

/// Euclidean projection onto the ball of the given radius around `center`.
inline Vec project_ball(const Vec& v, const Vec& center, double radius) {
  if (radius < 0.0) throw DimensionError("project_ball: radius must be >= 0");
  if (v.size() != center.size())
    throw DimensionError("project_ball: length mismatch");
  Vec d = v - center;
  double nd = d.norm();
  if (nd <= radius) return v;
  if (nd == 0.0) return center;
  return center + (radius / nd) * d;
}

struct ConvexConfig {
  int max_iters = 5000;
  double tol_rel = 1e-7;
  /// Scaled by (1 + ||y||) inside the solver; the converged iterate
  /// satisfies feasibility_gap <= tol_feas * (1 + ||y||).
  double tol_feas = 1e-9;
  double step_ratio = 1.0;
  double operator_norm_margin = 0.05;
  int norm_power_iters = 50;
};

enum class SolveStatus { Converged, MaxIters };

struct SolverResult {
  LiftedSignal estimate;
  int iterations = 0;
  double final_objective = 0.0;  // sum_i ||X_i||_*
  double feasibility_gap = 0.0;  // max(0, ||A(X) - y|| - tau)
  SolveStatus status = SolveStatus::MaxIters;
  double pd_gap = 0.0;           // Fenchel primal-dual gap at the last pair
  double operator_norm = 0.0;    // power-iteration gamma used for steps
};

namespace detail {

// svt returning the thresholded matrix together with its nuclear norm, so
// the solver does not redo the SVD for the objective.
inline std::pair<Mat, double> svt_with_norm(const Mat& m, double threshold) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  double nn = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    sv[i] = std::max(sv[i] - threshold, 0.0);
    nn += sv[i];
  }
  return {svd.matrixU() * sv.asDiagonal() * svd.matrixV().adjoint(), nn};
}

// Fenchel dual value at z scaled into the dual-feasible set
// {max_i ||(A* z)_i|| <= 1}: -Re<y,z> - tau ||z||.
inline double dual_value(const MeasurementEnsemble& ens, const Observation& obs,
                         const Vec& z) {
  LiftedSignal az = adjoint(ens, z);
  double scale = 1.0;
  for (const auto& b : az.blocks) scale = std::max(scale, op_norm(b));
  Vec zf = z / scale;
  return -(obs.y.dot(zf)).real() - obs.tau * zf.norm();
}

}  // namespace detail

/// Solves min sum_i ||X_i||_* s.t. ||A(X) - y|| <= tau by primal-dual
/// hybrid-gradient splitting: nuclear-norm prox on the blocks, ball
/// projection on the dual side via the Moreau decomposition. Returns the
/// best iterate by (feasibility violation, objective).
inline SolverResult solve_nuclear(const MeasurementEnsemble& ens,
                                  const Observation& obs,
                                  const ConvexConfig& cfg = {}) {
  if (cfg.max_iters < 1) throw DimensionError("solve_nuclear: max_iters >= 1");
  if (obs.y.size() != ens.L)
    throw DimensionError("solve_nuclear: observation length differs from L");

  const double ynorm = obs.y.norm();
  const double tol_feas = cfg.tol_feas * (1.0 + ynorm);

  Rng norm_rng(0x9a2f17c3u);
  double gamma = operator_norm_estimate(ens, cfg.norm_power_iters, norm_rng);
  gamma = std::max(gamma, 1e-12) * 1.02;  // power iteration underestimates
  const double s = std::sqrt(1.0 - cfg.operator_norm_margin) / gamma;
  const double step_primal = s * cfg.step_ratio;
  const double step_dual = s / cfg.step_ratio;

  LiftedSignal x = zero_lifted(ens);
  Vec z = Vec::Zero(ens.L);
  Vec ax = Vec::Zero(ens.L);  // A(x_k)
  Vec ax_prev = ax;           // A(x_{k-1})

  SolverResult best;
  best.estimate = x;
  best.final_objective = 0.0;
  best.feasibility_gap = std::max(0.0, ynorm - obs.tau);
  best.operator_norm = gamma;
  double best_violation = std::max(0.0, best.feasibility_gap - tol_feas);

  int it = 0;
  bool converged = false;
  bool satisfied = false;  // both stopping tolerances have held at least once
  int stall = 0;
  double prev_feas = std::numeric_limits<double>::infinity();
  for (; it < cfg.max_iters; ++it) {
    Vec v = z + step_dual * (2.0 * ax - ax_prev);
    z = v - step_dual * project_ball(v / step_dual, obs.y, obs.tau);

    LiftedSignal grad = adjoint(ens, z);
    double objective = 0.0;
    LiftedSignal x_new = x;
    for (int i = 0; i < ens.r(); ++i) {
      auto [m, nn] = detail::svt_with_norm(
          x.blocks[i] - step_primal * grad.blocks[i], step_primal);
      x_new.blocks[i] = std::move(m);
      objective += nn;
    }
    if (!std::isfinite(objective) || !all_finite(x_new))
      throw NumericError("solve_nuclear: diverged", it);

    ax_prev = ax;
    ax = forward(ens, x_new);
    double feas_gap = std::max(0.0, (ax - obs.y).norm() - obs.tau);
    double dx = norm_f(x_new - x);
    double xn = norm_f(x_new);
    x = std::move(x_new);

    double violation = std::max(0.0, feas_gap - tol_feas);
    bool take = violation < best_violation ||
                (violation == 0.0 && best_violation == 0.0) ||
                (violation == best_violation && violation > 0.0 &&
                 objective < best.final_objective);
    if (take) {
      best_violation = violation;
      best.estimate = x;
      best.final_objective = objective;
      best.feasibility_gap = feas_gap;
    }

    if (dx <= cfg.tol_rel * std::max(1.0, xn) && feas_gap <= tol_feas)
      satisfied = true;
    if (satisfied) {
      // polish: keep the dual ascent running while feasibility still
      // improves geometrically, down to a floor well under the tolerance
      converged = true;
      if (feas_gap <= 1e-3 * tol_feas) {
        ++it;
        break;
      }
      stall = feas_gap > 0.99 * prev_feas ? stall + 1 : 0;
      if (stall >= 3) {
        ++it;
        break;
      }
    }
    prev_feas = feas_gap;
  }

  SolverResult out = best;
  out.iterations = it;
  out.status = converged ? SolveStatus::Converged : SolveStatus::MaxIters;
  out.pd_gap = out.final_objective - detail::dual_value(ens, obs, z);
  return out;
}

}  // namespace demix

#endif  // DEMIX_CONVEX_HPP
