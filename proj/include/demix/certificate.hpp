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

#ifndef DEMIX_CERTIFICATE_HPP
#define DEMIX_CERTIFICATE_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "demix/coherence.hpp"
#include "demix/operators.hpp"
#include "demix/types.hpp"

namespace demix {

/// sgn(X^0): block i is h_i m_i* (both unit) when sigma_i > 0, zero
/// otherwise. Channels are normalized internally.
inline LiftedSignal sgn_lifted(const FactoredSignal& truth) {
  LiftedSignal s;
  for (int i = 0; i < truth.r(); ++i) {
    double nh = truth.channels[i].norm();
    double sigma = truth.messages[i].norm();
    if (nh == 0.0 || sigma == 0.0) {
      s.blocks.push_back(
          Mat::Zero(truth.channels[i].size(), truth.messages[i].size()));
      continue;
    }
    s.blocks.push_back((truth.channels[i] / nh) *
                       (truth.messages[i] / sigma).adjoint());
  }
  return s;
}

/// Unit channel/message pair per block, spanning the tangent spaces
/// T_i = {h_i u* + v m_i*} of the rank-one ground truth. For zero
/// messages, m_i defaults to the first coordinate vector.
struct TangentFrame {
  std::vector<Vec> channels;  // unit h_i
  std::vector<Vec> messages;  // unit m_i
  std::vector<double> sigmas;

  int r() const { return static_cast<int>(channels.size()); }
};

inline TangentFrame make_tangent_frame(const FactoredSignal& truth) {
  TangentFrame f;
  for (int i = 0; i < truth.r(); ++i) {
    double nh = truth.channels[i].norm();
    if (nh == 0.0)
      throw NormalizationError("tangent frame: zero channel vector");
    f.channels.push_back(truth.channels[i] / nh);
    double sigma = truth.messages[i].norm();
    f.sigmas.push_back(sigma * nh);
    f.messages.push_back(sigma > 0.0
                             ? Vec(truth.messages[i] / sigma)
                             : Vec(Vec::Unit(truth.messages[i].size(), 0)));
  }
  return f;
}

/// P_{T_i} Z = h h* Z + (Id - h h*) Z m m*, applied block-wise.
inline LiftedSignal project_tangent(const TangentFrame& frame,
                                    const LiftedSignal& x) {
  if (x.r() != frame.r())
    throw DimensionError("project_tangent: block count mismatch");
  LiftedSignal out;
  for (int i = 0; i < frame.r(); ++i) {
    const Vec& h = frame.channels[i];
    const Vec& m = frame.messages[i];
    const Mat& z = x.blocks[i];
    Mat hz = h * (h.adjoint() * z);
    Mat zm = (z * m) * m.adjoint();
    out.blocks.push_back(hz + zm - h * ((h.adjoint() * zm)));
  }
  return out;
}

namespace detail {

// Orthonormal completion of the unit vector h: columns 2..K of the
// Householder Q span the orthogonal complement of h.
inline Mat orthogonal_complement(const Vec& h) {
  const Eigen::Index k = h.size();
  Eigen::HouseholderQR<Mat> qr(h);
  Mat q = qr.householderQ() * Mat::Identity(k, k);
  return q.rightCols(k - 1);
}

}  // namespace detail

/// Orthonormal basis of T: per block, {h e_k*} for k in [N_i] plus
/// {g_j m*} with g_j an orthonormal basis of h^perp. Exactly
/// K_i + N_i - 1 elements per block, embedded with zero off-blocks.
inline std::vector<LiftedSignal> tangent_basis(const TangentFrame& frame,
                                               const MeasurementEnsemble& ens) {
  std::vector<LiftedSignal> basis;
  for (int i = 0; i < frame.r(); ++i) {
    const Vec& h = frame.channels[i];
    const Vec& m = frame.messages[i];
    for (Eigen::Index k = 0; k < ens.n(i); ++k) {
      LiftedSignal e = zero_lifted(ens);
      e.blocks[i] = h * Vec::Unit(ens.n(i), k).adjoint();
      basis.push_back(std::move(e));
    }
    if (ens.k(i) > 1) {
      Mat comp = detail::orthogonal_complement(h);
      for (Eigen::Index j = 0; j < comp.cols(); ++j) {
        LiftedSignal e = zero_lifted(ens);
        e.blocks[i] = comp.col(j) * m.adjoint();
        basis.push_back(std::move(e));
      }
    }
  }
  return basis;
}

/// Orthonormal basis of T^p = T_h + T_{S^p h} + T_m, built by modified
/// Gram-Schmidt over the spanning set with rank tolerance 1e-10.
inline std::vector<LiftedSignal> tp_basis(const TangentFrame& frame,
                                          const MeasurementEnsemble& ens,
                                          const Partition& part, int p) {
  std::vector<LiftedSignal> basis;
  for (int i = 0; i < frame.r(); ++i) {
    const Vec& h = frame.channels[i];
    const Vec& m = frame.messages[i];
    Vec sh = part.s(i, p) * h;
    std::vector<Mat> spanning;
    for (Eigen::Index k = 0; k < ens.n(i); ++k) {
      spanning.push_back(h * Vec::Unit(ens.n(i), k).adjoint());
      spanning.push_back(sh * Vec::Unit(ens.n(i), k).adjoint());
    }
    for (Eigen::Index j = 0; j < ens.k(i); ++j)
      spanning.push_back(Vec::Unit(ens.k(i), j) * m.adjoint());

    std::vector<Mat> ortho;
    for (Mat cand : spanning) {
      for (int pass = 0; pass < 2; ++pass)
        for (const Mat& q : ortho)
          cand -= (cand.array() * q.array().conjugate()).sum() * q;
      double nc = cand.norm();
      if (nc > 1e-10) ortho.push_back(cand / nc);
    }
    for (Mat& q : ortho) {
      LiftedSignal e = zero_lifted(ens);
      e.blocks[i] = std::move(q);
      basis.push_back(std::move(e));
    }
  }
  return basis;
}

/// Record of one Golfing-scheme run: residual norms ||W_p||_F for
/// p = 0..P, the incoherence sequence mu_p for p = 0..P-1, the certificate
/// Y = Y_P with its dual vector z (Y = A* z), and the achieved
/// dual-certificate constants.
struct GolfingTrace {
  std::vector<double> w_norms;
  std::vector<double> mu_seq;
  LiftedSignal certificate;
  Vec dual_vector;
  double alpha_achieved = 0.0;  // ||P_T Y - sgn(X^0)||_F
  double beta_achieved = 0.0;   // max_i ||P_{T_i^perp} Y_i||
  double z_norm = 0.0;
};

/// Runs the Golfing recursion
///   Y_p = Y_{p-1} + (L/Q) (A^p)* A^p S^p (sgn(X^0) - P_T(Y_{p-1}))
/// over the partition's sets, recording the residual decay and the mu_p
/// sequence. Truth channels are normalized internally (messages rescaled
/// to preserve the lift). The dual vector z accumulates
/// (L/Q) A^p S^p(W_{p-1}) so that A* z = Y_P exactly.
inline GolfingTrace golfing_run(const MeasurementEnsemble& ens,
                                const FactoredSignal& truth,
                                const Partition& part) {
  if (truth.r() != ens.r())
    throw DimensionError("golfing_run: truth block count mismatch");
  FactoredSignal normalized = truth;
  for (int i = 0; i < truth.r(); ++i) {
    double nh = normalized.channels[i].norm();
    if (nh == 0.0)
      throw NormalizationError("golfing_run: zero channel vector");
    normalized.channels[i] /= nh;
    normalized.messages[i] *= nh;
  }
  TangentFrame frame = make_tangent_frame(normalized);
  LiftedSignal sgn = sgn_lifted(normalized);

  const double l_over_q = static_cast<double>(ens.L) / part.q;
  const double sqrt_l = std::sqrt(static_cast<double>(ens.L));

  GolfingTrace trace;
  LiftedSignal w = sgn;
  LiftedSignal y = zero_lifted(ens);
  Vec z = Vec::Zero(ens.L);
  trace.w_norms.push_back(norm_f(w));

  for (int p = 0; p < part.p_count; ++p) {
    const std::vector<int>& set = part.sets[p];

    // mu_{p} (0-based): sqrt(L) max_{l in Gamma_{p+1}, k} ||W_{k,p}* S_{k,p+1} b_{k,l}||
    double mu = 0.0;
    for (int k = 0; k < ens.r(); ++k) {
      const Mat& b = ens.blocks[k].basis.entries;
      Mat bsub = b(set, Eigen::all);  // rows are b*_l
      Mat cols = w.blocks[k].adjoint() * (part.s(k, p) * bsub.adjoint());
      mu = std::max(mu, cols.colwise().norm().maxCoeff());
    }
    trace.mu_seq.push_back(sqrt_l * mu);

    LiftedSignal sw = w;
    for (int i = 0; i < ens.r(); ++i) sw.blocks[i] = part.s(i, p) * w.blocks[i];
    Vec compact = forward_on(ens, set, sw);
    y += Cplx(l_over_q, 0.0) * adjoint_on(ens, set, compact);
    for (std::size_t j = 0; j < set.size(); ++j)
      z[set[j]] += l_over_q * compact[static_cast<Eigen::Index>(j)];

    w = sgn - project_tangent(frame, y);
    trace.w_norms.push_back(norm_f(w));
  }

  trace.alpha_achieved = trace.w_norms.back();
  double beta = 0.0;
  LiftedSignal pt_y = project_tangent(frame, y);
  for (int i = 0; i < ens.r(); ++i)
    beta = std::max(beta, op_norm(y.blocks[i] - pt_y.blocks[i]));
  trace.beta_achieved = beta;
  trace.z_norm = z.norm();
  trace.certificate = std::move(y);
  trace.dual_vector = std::move(z);
  return trace;
}

struct DualConditionReport {
  bool cond1_ok = false;  // alpha_achieved <= 1/(8 gamma)
  bool cond2_ok = false;  // beta_achieved <= 1/4
  double alpha_bound = 0.0;
  double margin = 0.0;  // min slack across the two conditions
};

/// Sufficient conditions for the certificate, with the standard parameter
/// choices beta = 1/4 and alpha = 1/(8 gamma).
inline DualConditionReport verify_dual_conditions(const GolfingTrace& trace,
                                                  double gamma) {
  if (gamma <= 0.0) throw DimensionError("verify_dual_conditions: gamma > 0");
  DualConditionReport rep;
  rep.alpha_bound = 1.0 / (8.0 * gamma);
  rep.cond1_ok = trace.alpha_achieved <= rep.alpha_bound;
  rep.cond2_ok = trace.beta_achieved <= 0.25;
  rep.margin = std::min(rep.alpha_bound - trace.alpha_achieved,
                        0.25 - trace.beta_achieved);
  return rep;
}

struct IsometrySpectrum {
  double min_eig = 0.0;
  double max_eig = 0.0;
  // per partition set: extremes of the T_{i,p}-weighted Rayleigh quotient
  std::vector<std::pair<double, double>> per_set;
};

namespace detail {

inline void check_orthonormal(const std::vector<LiftedSignal>& basis) {
  for (std::size_t a = 0; a < basis.size(); ++a)
    for (std::size_t b = a; b < basis.size(); ++b) {
      Cplx g = inner_f(basis[a], basis[b]);
      double want = a == b ? 1.0 : 0.0;
      if (std::abs(g - want) > 1e-10)
        throw FrameError("isometry: basis is not orthonormal");
    }
}

}  // namespace detail

/// Extreme eigenvalues of the Gram matrix G_ab = <A(E_a), A(E_b)> over an
/// orthonormal basis {E_a} of T; these bracket ||A(X)||^2 / ||X||_F^2 on
/// T. With a partition, also the per-set extremes of
/// (L/Q) ||A^p(Y)||^2 against sum_i ||T^{1/2}_{i,p} Y_i||^2 over T^p.
inline IsometrySpectrum local_isometry_spectrum(
    const MeasurementEnsemble& ens, const TangentFrame& frame,
    const Partition* part = nullptr) {
  std::vector<LiftedSignal> basis = tangent_basis(frame, ens);
  detail::check_orthonormal(basis);
  const auto d = static_cast<Eigen::Index>(basis.size());
  std::vector<Vec> images;
  images.reserve(basis.size());
  for (const auto& e : basis) images.push_back(forward(ens, e));
  Mat gram(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) gram(a, b) = images[a].dot(images[b]);
  Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
  IsometrySpectrum spec;
  spec.min_eig = es.eigenvalues()(0);
  spec.max_eig = es.eigenvalues()(d - 1);

  if (part != nullptr) {
    const double l_over_q = static_cast<double>(ens.L) / part->q;
    for (int p = 0; p < part->p_count; ++p) {
      std::vector<LiftedSignal> pbasis = tp_basis(frame, ens, *part, p);
      const auto dp = static_cast<Eigen::Index>(pbasis.size());
      std::vector<Vec> im;
      im.reserve(pbasis.size());
      for (const auto& e : pbasis)
        im.push_back(forward_on(ens, part->sets[p], e));
      Mat m(dp, dp), n(dp, dp);
      for (Eigen::Index a = 0; a < dp; ++a)
        for (Eigen::Index b = 0; b < dp; ++b) {
          m(a, b) = l_over_q * im[a].dot(im[b]);
          Cplx acc = 0.0;
          for (int i = 0; i < ens.r(); ++i)
            acc += ((part->t(i, p) * pbasis[b].blocks[i]).array() *
                    pbasis[a].blocks[i].array().conjugate())
                       .sum();
          n(a, b) = acc;
        }
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(m, n,
                                                        Eigen::EigenvaluesOnly);
      spec.per_set.emplace_back(ges.eigenvalues()(0),
                                ges.eigenvalues()(dp - 1));
    }
  }
  return spec;
}

}  // namespace demix

#endif  // DEMIX_CERTIFICATE_HPP
