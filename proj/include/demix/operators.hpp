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

#ifndef DEMIX_OPERATORS_HPP
#define DEMIX_OPERATORS_HPP

#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "demix/random.hpp"
#include "demix/types.hpp"

namespace demix {

/// Rows of the unitary L-point DFT restricted to the first K columns:
/// entry (l,k) = exp(2*pi*i*l*k/L)/sqrt(L) for 0-based l,k. B*B = Id_K.
inline SubspaceBasis build_partial_dft_basis(Eigen::Index L, Eigen::Index K) {
  if (K < 1 || K > L) throw DimensionError("partial DFT basis needs 1 <= K <= L");
  Mat b(L, K);
  const double scale = 1.0 / std::sqrt(static_cast<double>(L));
  const double step = 2.0 * std::numbers::pi / static_cast<double>(L);
  for (Eigen::Index l = 0; l < L; ++l)
    for (Eigen::Index k = 0; k < K; ++k)
      b(l, k) = std::polar(scale, step * static_cast<double>(l * k));
  return {std::move(b), BasisKind::PartialDFT};
}

/// Orthonormalizes an i.i.d. CN(0,1) matrix by thin QR.
inline SubspaceBasis build_random_orthonormal_basis(Eigen::Index L,
                                                    Eigen::Index K, Rng& rng) {
  if (K < 1 || K > L)
    throw DimensionError("orthonormal basis needs 1 <= K <= L");
  Mat g = rng.cnormal_matrix(L, K);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(L, K);
  return {std::move(q), BasisKind::GeneralOrthonormal};
}

/// L x N matrix of i.i.d. CN(0,1) entries; deterministic given the stream.
inline Encoder sample_encoder(Eigen::Index L, Eigen::Index N, Rng& rng) {
  if (L < 1 || N < 1) throw DimensionError("encoder needs L, N >= 1");
  return {rng.cnormal_matrix(L, N)};
}

/// Ensemble with partial-DFT bases and fresh encoders, equal dims per block.
inline MeasurementEnsemble make_dft_ensemble(Eigen::Index L, int r,
                                             Eigen::Index K, Eigen::Index N,
                                             Rng& rng) {
  MeasurementEnsemble ens;
  ens.L = L;
  ens.blocks.reserve(r);
  SubspaceBasis dft = build_partial_dft_basis(L, K);
  for (int i = 0; i < r; ++i)
    ens.blocks.push_back({dft, sample_encoder(L, N, rng)});
  ens.check();
  return ens;
}

/// Ensemble with independent random orthonormal bases per block.
inline MeasurementEnsemble make_random_ensemble(Eigen::Index L, int r,
                                                Eigen::Index K, Eigen::Index N,
                                                Rng& rng) {
  MeasurementEnsemble ens;
  ens.L = L;
  ens.blocks.reserve(r);
  for (int i = 0; i < r; ++i)
    ens.blocks.push_back({build_random_orthonormal_basis(L, K, rng),
                          sample_encoder(L, N, rng)});
  ens.check();
  return ens;
}

/// A_i(X_i), entry l = b*_{i,l} X_i c_{i,l}.
inline Vec forward_block(const MeasurementEnsemble& ens, int i, const Mat& xi) {
  const Mat& b = ens.blocks[i].basis.entries;
  const Mat& c = ens.blocks[i].encoder.entries;
  if (xi.rows() != b.cols() || xi.cols() != c.cols())
    throw DimensionError("forward_block: block shape mismatch");
  return ((b * xi).cwiseProduct(c)).rowwise().sum();
}

/// A(X) = sum_i A_i(X_i).
inline Vec forward(const MeasurementEnsemble& ens, const LiftedSignal& x) {
  check_shapes(ens, x);
  Vec y = Vec::Zero(ens.L);
  for (int i = 0; i < ens.r(); ++i) y += forward_block(ens, i, x.blocks[i]);
  return y;
}

/// A*_i(y) = sum_l y[l] b_{i,l} c*_{i,l} = B* diag(y) conj(C).
inline Mat adjoint_block(const MeasurementEnsemble& ens, int i, const Vec& y) {
  if (y.size() != ens.L) throw DimensionError("adjoint: y length differs from L");
  const Mat& b = ens.blocks[i].basis.entries;
  const Mat& c = ens.blocks[i].encoder.entries;
  return b.adjoint() * (y.asDiagonal() * c.conjugate());
}

inline LiftedSignal adjoint(const MeasurementEnsemble& ens, const Vec& y) {
  LiftedSignal x;
  x.blocks.reserve(ens.blocks.size());
  for (int i = 0; i < ens.r(); ++i) x.blocks.push_back(adjoint_block(ens, i, y));
  return x;
}

/// A restricted to the rows in `set`, as a compact vector of length |set|.
inline Vec forward_on(const MeasurementEnsemble& ens,
                      const std::vector<int>& set, const LiftedSignal& x) {
  check_shapes(ens, x);
  Vec v = Vec::Zero(static_cast<Eigen::Index>(set.size()));
  for (int i = 0; i < ens.r(); ++i) {
    const Mat& b = ens.blocks[i].basis.entries;
    const Mat& c = ens.blocks[i].encoder.entries;
    Mat bx = b(set, Eigen::all) * x.blocks[i];
    v += (bx.cwiseProduct(c(set, Eigen::all))).rowwise().sum();
  }
  return v;
}

/// Adjoint of the restriction: blocks sum only over rows in `set`, with `v`
/// holding the compact values on those rows.
inline LiftedSignal adjoint_on(const MeasurementEnsemble& ens,
                               const std::vector<int>& set, const Vec& v) {
  if (v.size() != static_cast<Eigen::Index>(set.size()))
    throw DimensionError("adjoint_on: value count differs from set size");
  LiftedSignal x;
  x.blocks.reserve(ens.blocks.size());
  for (int i = 0; i < ens.r(); ++i) {
    const Mat& b = ens.blocks[i].basis.entries;
    const Mat& c = ens.blocks[i].encoder.entries;
    x.blocks.push_back(b(set, Eigen::all).adjoint() *
                       (v.asDiagonal() * c(set, Eigen::all).conjugate()));
  }
  return x;
}

/// A^p(X) = P_{Gamma_p}(A(X)): forward on the indices in `set`, zero
/// elsewhere. Indices are 0-based positions into [0, L).
inline Vec restricted_forward(const MeasurementEnsemble& ens,
                              const std::vector<int>& set,
                              const LiftedSignal& x) {
  for (int l : set)
    if (l < 0 || l >= ens.L)
      throw DimensionError("restricted_forward: index out of range");
  Vec compact = forward_on(ens, set, x);
  Vec y = Vec::Zero(ens.L);
  for (std::size_t j = 0; j < set.size(); ++j)
    y[set[j]] = compact[static_cast<Eigen::Index>(j)];
  return y;
}

/// Circular convolution (w * s)[k] = sum_j w[j] s[(k-j) mod L], evaluated
/// through the unitary-DFT identity w*s = sqrt(L) F^* diag(Fw) Fs.
inline Vec circular_convolve(const Vec& w, const Vec& s) {
  if (w.size() != s.size())
    throw DimensionError("circular_convolve: length mismatch");
  const Eigen::Index L = w.size();
  Eigen::FFT<double> fft;
  std::vector<Cplx> wt(L), st(L), prod(L), out(L);
  for (Eigen::Index i = 0; i < L; ++i) {
    wt[i] = w[i];
    st[i] = s[i];
  }
  std::vector<Cplx> wf, sf;
  fft.fwd(wf, wt);
  fft.fwd(sf, st);
  for (Eigen::Index i = 0; i < L; ++i) prod[i] = wf[i] * sf[i];
  fft.inv(out, prod);
  Vec y(L);
  for (Eigen::Index i = 0; i < L; ++i) y[i] = out[i];
  return y;
}

/// y = A(lift(truth)) + e with e uniformly random on the sphere of radius
/// tau (e = 0 when tau = 0), so that ||e|| = tau holds exactly.
inline Observation synthesize_observation(const MeasurementEnsemble& ens,
                                          const FactoredSignal& truth,
                                          double tau, Rng& rng) {
  if (tau < 0.0) throw DimensionError("synthesize_observation: tau < 0");
  Vec y = forward(ens, lift(truth));
  if (tau > 0.0) y += tau * rng.unit_vector(ens.L);
  return {std::move(y), tau};
}

/// Power-iteration estimate of ||A||_{F->2} (largest singular value of the
/// lifted linear map). The returned Rayleigh estimate is nondecreasing in
/// `iters` and never exceeds the true norm.
inline double operator_norm_estimate(const MeasurementEnsemble& ens, int iters,
                                     Rng& rng) {
  if (iters < 1) throw DimensionError("operator_norm_estimate: iters >= 1");
  LiftedSignal z = zero_lifted(ens);
  for (auto& b : z.blocks) b = rng.cnormal_matrix(b.rows(), b.cols());
  double nz = norm_f(z);
  if (nz == 0.0) return 0.0;
  z *= Cplx(1.0 / nz, 0.0);
  double estimate = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vec az = forward(ens, z);
    estimate = az.norm();  // Rayleigh quotient of A*A at unit z
    LiftedSignal next = adjoint(ens, az);
    double nn = norm_f(next);
    if (nn == 0.0) return 0.0;
    next *= Cplx(1.0 / nn, 0.0);
    z = std::move(next);
  }
  return estimate;
}

}  // namespace demix

#endif  // DEMIX_OPERATORS_HPP
