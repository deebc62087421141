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

#ifndef DEMIX_WIRTINGER_HPP
#define DEMIX_WIRTINGER_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "demix/convex.hpp"
#include "demix/operators.hpp"
#include "demix/types.hpp"

namespace demix {

enum class EtaInitPolicy { FixedInverseLipschitz, DoublePrevious };

struct WirtingerConfig {
  double grad_tol = 1e-4;  // epsilon: stop when ||grad F|| falls below
  int max_iters = 1000;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  EtaInitPolicy eta_init_policy = EtaInitPolicy::DoublePrevious;
  int max_backtracks = 50;
  int norm_power_iters = 50;

  void check() const {
    if (!(shrink > 0.0 && shrink < 1.0))
      throw DimensionError("wirtinger: shrink must lie in (0,1)");
    if (!(armijo_c > 0.0 && armijo_c <= 0.5))
      throw DimensionError("wirtinger: armijo_c must lie in (0, 0.5]");
  }
};

/// F(h,x) = ||A(h_1 x_1*, ..., h_r x_r*) - y||^2.
inline double objective(const MeasurementEnsemble& ens, const Observation& obs,
                        const std::vector<Vec>& h, const std::vector<Vec>& x) {
  FactoredSignal f{h, x};
  return (forward(ens, lift(f)) - obs.y).squaredNorm();
}

/// Block-wise Wirtinger gradients of F:
///   grad_h_i = (diag(C_i conj(x_i)) B_i)* res,
///   grad_x_i = (diag(B_i h_i) C_i)^T conj(res),
/// with res = A(h x*) - y. The descent update uses these directly.
inline std::pair<std::vector<Vec>, std::vector<Vec>> gradients(
    const MeasurementEnsemble& ens, const Observation& obs,
    const std::vector<Vec>& h, const std::vector<Vec>& x) {
  FactoredSignal f{h, x};
  Vec res = forward(ens, lift(f)) - obs.y;
  std::vector<Vec> gh, gx;
  gh.reserve(h.size());
  gx.reserve(x.size());
  for (int i = 0; i < ens.r(); ++i) {
    const Mat& b = ens.blocks[i].basis.entries;
    const Mat& c = ens.blocks[i].encoder.entries;
    Vec cx = c * x[i].conjugate();
    gh.push_back(b.adjoint() * (cx.conjugate().asDiagonal() * res));
    Vec bh = b * h[i];
    gx.push_back(c.transpose() * (bh.asDiagonal() * res.conjugate()));
  }
  return {std::move(gh), std::move(gx)};
}

inline double gradient_norm_sq(const std::vector<Vec>& gh,
                               const std::vector<Vec>& gx) {
  double s = 0.0;
  for (const auto& g : gh) s += g.squaredNorm();
  for (const auto& g : gx) s += g.squaredNorm();
  return s;
}

/// Spectral initialization: per-block top singular pair of A*(y), scaled
/// by sqrt of the top singular value. The pair is rotated so the largest-
/// magnitude entry of the left vector is real nonnegative, which makes the
/// output deterministic despite the SVD's phase ambiguity.
struct SpectralInit {
  std::vector<Vec> v0;
  std::vector<Vec> u0;
  bool degenerate = false;  // a block had a (near-)tied top singular value
};

inline SpectralInit spectral_init_from(const LiftedSignal& z) {
  SpectralInit init;
  for (const auto& block : z.blocks) {
    if (block.norm() <= 1e-300) {
      init.v0.push_back(Vec::Zero(block.rows()));
      init.u0.push_back(Vec::Zero(block.cols()));
      continue;
    }
    Eigen::JacobiSVD<Mat> svd(block, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double d = sv(0);
    if (sv.size() > 1 && sv(0) - sv(1) <= 1e-12 * sv(0))
      init.degenerate = true;
    Vec u = svd.matrixU().col(0);
    Vec v = svd.matrixV().col(0);
    Eigen::Index peak;
    u.cwiseAbs().maxCoeff(&peak);
    Cplx phase = u[peak] / std::abs(u[peak]);
    u *= std::conj(phase);
    v *= std::conj(phase);
    init.v0.push_back(std::sqrt(d) * u);
    init.u0.push_back(std::sqrt(d) * v);
  }
  return init;
}

inline SpectralInit spectral_init(const MeasurementEnsemble& ens,
                                  const Observation& obs) {
  return spectral_init_from(adjoint(ens, obs.y));
}

struct LineSearchResult {
  double eta = 0.0;
  double new_objective = 0.0;
  int backtracks = 0;
  bool stalled = false;  // max_backtracks exhausted without decrease
};

/// Backtracking line search along the negative gradient: the largest
/// eta0 * shrink^k (k <= max_backtracks) with
/// F(new) <= F(old) - armijo_c * eta * ||grad F||^2.
inline LineSearchResult line_search(const MeasurementEnsemble& ens,
                                    const Observation& obs,
                                    const std::vector<Vec>& h,
                                    const std::vector<Vec>& x,
                                    const std::vector<Vec>& gh,
                                    const std::vector<Vec>& gx, double f_old,
                                    double eta0, const WirtingerConfig& cfg) {
  double gsq = gradient_norm_sq(gh, gx);
  if (gsq == 0.0)
    throw NumericError("line_search: zero gradient; caller should stop");
  std::vector<Vec> h_try(h.size()), x_try(x.size());
  LineSearchResult out;
  double eta = eta0;
  for (int k = 0; k <= cfg.max_backtracks; ++k) {
    for (std::size_t i = 0; i < h.size(); ++i) h_try[i] = h[i] - eta * gh[i];
    for (std::size_t i = 0; i < x.size(); ++i) x_try[i] = x[i] - eta * gx[i];
    double f_new = objective(ens, obs, h_try, x_try);
    if (f_new <= f_old - cfg.armijo_c * eta * gsq) {
      out.eta = eta;
      out.new_objective = f_new;
      out.backtracks = k;
      return out;
    }
    if (k == cfg.max_backtracks) {
      out.eta = eta;
      out.new_objective = f_new;
      out.backtracks = k;
      out.stalled = true;
      return out;
    }
    eta *= cfg.shrink;
  }
  return out;  // unreachable
}

struct WirtingerResult {
  FactoredSignal factored;
  LiftedSignal estimate;
  int iterations = 0;
  double final_objective = 0.0;
  double grad_norm = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  bool stalled = false;
  bool degenerate_init = false;
  std::vector<double> objective_trace;
};

/// Gradient descent with backtracking from a given iterate, updating all
/// h- and x-blocks simultaneously with one shared step per iteration,
/// until ||grad F|| < grad_tol or max_iters. The accepted Armijo steps
/// make the objective trace nonincreasing.
inline WirtingerResult solve_wirtinger_from(const MeasurementEnsemble& ens,
                                            const Observation& obs,
                                            std::vector<Vec> h,
                                            std::vector<Vec> x,
                                            const WirtingerConfig& cfg = {}) {
  cfg.check();
  if (obs.y.size() != ens.L)
    throw DimensionError("solve_wirtinger: observation length differs from L");

  WirtingerResult out;

  Rng norm_rng(0x51a7b3e5u);
  double gamma =
      std::max(operator_norm_estimate(ens, cfg.norm_power_iters, norm_rng),
               1e-12);
  double eta_next = 1.0 / (gamma * gamma);

  double f = objective(ens, obs, h, x);
  if (!std::isfinite(f)) throw NumericError("solve_wirtinger: non-finite F", 0);
  out.objective_trace.push_back(f);

  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    auto [gh, gx] = gradients(ens, obs, h, x);
    double gnorm = std::sqrt(gradient_norm_sq(gh, gx));
    if (!std::isfinite(gnorm))
      throw NumericError("solve_wirtinger: non-finite gradient", it);
    if (gnorm < cfg.grad_tol) {
      out.status = SolveStatus::Converged;
      out.grad_norm = gnorm;
      break;
    }
    LineSearchResult ls =
        line_search(ens, obs, h, x, gh, gx, f, eta_next, cfg);
    if (ls.stalled && ls.new_objective > f) {
      // no decrease available at the smallest trial step
      out.stalled = true;
      out.grad_norm = gnorm;
      break;
    }
    for (std::size_t i = 0; i < h.size(); ++i) h[i] -= ls.eta * gh[i];
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= ls.eta * gx[i];
    f = ls.new_objective;
    out.objective_trace.push_back(f);
    out.stalled = out.stalled || ls.stalled;
    eta_next = cfg.eta_init_policy == EtaInitPolicy::DoublePrevious
                   ? 2.0 * ls.eta
                   : 1.0 / (gamma * gamma);
  }

  if (out.status != SolveStatus::Converged && it == cfg.max_iters) {
    auto [gh, gx] = gradients(ens, obs, h, x);  // telemetry only
    out.grad_norm = std::sqrt(gradient_norm_sq(gh, gx));
  }

  out.iterations = it;
  out.final_objective = f;
  out.factored = FactoredSignal{std::move(h), std::move(x)};
  out.estimate = lift(out.factored);
  return out;
}

/// Spectral initialization followed by the gradient descent above.
inline WirtingerResult solve_wirtinger(const MeasurementEnsemble& ens,
                                       const Observation& obs,
                                       const WirtingerConfig& cfg = {}) {
  SpectralInit init = spectral_init(ens, obs);
  WirtingerResult out = solve_wirtinger_from(ens, obs, std::move(init.v0),
                                             std::move(init.u0), cfg);
  out.degenerate_init = init.degenerate;
  return out;
}

}  // namespace demix

#endif  // DEMIX_WIRTINGER_HPP
