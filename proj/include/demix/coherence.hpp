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

#ifndef DEMIX_COHERENCE_HPP
#define DEMIX_COHERENCE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "demix/operators.hpp"
#include "demix/types.hpp"

namespace demix {

/// Operator norm of a Hermitian matrix: full eigendecomposition up to
/// 64 x 64, power iteration above that.
inline double hermitian_op_norm(const Mat& m) {
  if (m.rows() <= 64) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  Vec v = Vec::Ones(m.rows()).normalized();
  double est = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec w = m * v;
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    est = nw;
    v = w / nw;
  }
  return est;
}

/// mu^2 = (L/K) max_l ||b_l||^2. Equals 1 for partial low-frequency DFT
/// bases and is at most L/K in general.
inline double mu_max(const SubspaceBasis& basis, Eigen::Index L) {
  if (basis.rows() != L) throw DimensionError("mu_max: basis rows differ from L");
  double m = basis.entries.rowwise().squaredNorm().maxCoeff();
  return m * static_cast<double>(L) / static_cast<double>(basis.cols());
}

/// K_mu for one block: K * mu^2 = L * max_l ||b_l||^2.
inline double k_mu_of(const SubspaceBasis& basis, Eigen::Index L) {
  return static_cast<double>(basis.cols()) * mu_max(basis, L);
}

inline double k_mu_of(const MeasurementEnsemble& ens) {
  double k = 0.0;
  for (const auto& b : ens.blocks) k = std::max(k, k_mu_of(b.basis, ens.L));
  return k;
}

/// Partition {Gamma_p} of the measurement rows with the per-set frame
/// operators T_{i,p} = (L/Q) sum_{l in Gamma_p} b_l b_l* and their
/// inverses S_{i,p}. nu_achieved = max_{i,p} ||Id - T_{i,p}||.
struct Partition {
  std::vector<std::vector<int>> sets;
  int p_count = 0;
  double q = 0.0;  // L/P
  std::vector<std::vector<Mat>> t_matrices;  // [i][p]
  std::vector<std::vector<Mat>> s_matrices;  // [i][p]
  double nu_achieved = 0.0;

  const Mat& t(int i, int p) const { return t_matrices[i][p]; }
  const Mat& s(int i, int p) const { return s_matrices[i][p]; }
};

/// max_{i,p} ||Id - T_{i,p}|| for candidate index sets, without inverting.
inline double max_frame_deviation(const MeasurementEnsemble& ens,
                                  const std::vector<std::vector<int>>& sets) {
  const double l_over_q = static_cast<double>(sets.size());
  double nu = 0.0;
  for (int i = 0; i < ens.r(); ++i) {
    const Mat& b = ens.blocks[i].basis.entries;
    const Eigen::Index K = b.cols();
    for (const auto& set : sets) {
      Mat bsub = b(set, Eigen::all);
      Mat t = l_over_q * (bsub.adjoint() * bsub);
      nu = std::max(nu, hermitian_op_norm(Mat::Identity(K, K) - t));
    }
  }
  return nu;
}

/// Builds T/S matrices and nu for given index sets. Throws
/// PartitionDegeneracyError when some T_{i,p} is numerically singular.
inline Partition partition_from_sets(const MeasurementEnsemble& ens,
                                     std::vector<std::vector<int>> sets) {
  Partition part;
  part.p_count = static_cast<int>(sets.size());
  part.q = static_cast<double>(ens.L) / part.p_count;
  part.sets = std::move(sets);
  const double l_over_q = static_cast<double>(part.p_count);
  part.t_matrices.resize(ens.r());
  part.s_matrices.resize(ens.r());
  double nu = 0.0;
  for (int i = 0; i < ens.r(); ++i) {
    const Mat& b = ens.blocks[i].basis.entries;
    const Eigen::Index K = b.cols();
    part.t_matrices[i].resize(part.p_count);
    part.s_matrices[i].resize(part.p_count);
    for (int p = 0; p < part.p_count; ++p) {
      Mat bsub = b(part.sets[p], Eigen::all);  // rows are b*_l
      Mat t = l_over_q * (bsub.adjoint() * bsub);
      nu = std::max(nu, hermitian_op_norm(Mat::Identity(K, K) - t));
      Eigen::FullPivLU<Mat> lu(t);
      if (!lu.isInvertible())
        throw PartitionDegeneracyError("singular frame operator T_{i,p}");
      part.s_matrices[i][p] = lu.inverse();
      part.t_matrices[i][p] = std::move(t);
    }
  }
  part.nu_achieved = nu;
  return part;
}

/// Constructs a partition with nu_achieved <= nu and Q/2 <= |Gamma_p| <=
/// 3Q/2. With `dft_shortcut`, all-DFT ensembles with L = P*Q and
/// max K_i <= Q get the arithmetic-progression partition, which is exact
/// (nu = 0 up to roundoff) and independent of the stream. Otherwise indices
/// are assigned i.i.d. uniformly at random, up to `max_attempts` times.
inline Partition construct_partition(const MeasurementEnsemble& ens, int P,
                                     double nu, bool dft_shortcut, Rng& rng,
                                     int max_attempts = 50) {
  if (P < 1 || P > ens.L)
    throw DimensionError("construct_partition: need 1 <= P <= L");
  if (!(nu > 0.0 && nu < 1.0))
    throw DimensionError("construct_partition: need nu in (0,1)");

  const Eigen::Index L = ens.L;
  bool all_dft = true;
  for (const auto& b : ens.blocks)
    all_dft = all_dft && b.basis.kind == BasisKind::PartialDFT;
  const bool decimable =
      dft_shortcut && all_dft && L % P == 0 && ens.k_max() <= L / P;

  if (decimable) {
    std::vector<std::vector<int>> sets(P);
    for (int l = 0; l < L; ++l) sets[l % P].push_back(l);
    return partition_from_sets(ens, std::move(sets));
  }

  const double q = static_cast<double>(L) / P;
  double best_nu = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<std::vector<int>> sets(P);
    for (int l = 0; l < L; ++l) sets[rng.below(P)].push_back(l);
    bool sizes_ok = true;
    for (const auto& s : sets) {
      double sz = static_cast<double>(s.size());
      sizes_ok = sizes_ok && sz >= 0.5 * q && sz <= 1.5 * q;
    }
    if (!sizes_ok) continue;
    double dev = max_frame_deviation(ens, sets);
    best_nu = std::min(best_nu, dev);
    if (dev <= nu) return partition_from_sets(ens, std::move(sets));
  }
  throw ConstructionError(
      "construct_partition: no admissible partition in " +
          std::to_string(max_attempts) + " attempts (best nu " +
          std::to_string(best_nu) + ", requested " + std::to_string(nu) + ")",
      best_nu);
}

/// gamma-tilde of Definition 2: 2 sqrt(omega max{1, r K_mu N / L}
/// log2(L + r K N)).
inline double gamma_tilde(const MeasurementEnsemble& ens, double omega) {
  const double L = static_cast<double>(ens.L);
  const double r = static_cast<double>(ens.r());
  const double kmu = k_mu_of(ens);
  const double n = static_cast<double>(ens.n_max());
  const double k = static_cast<double>(ens.k_max());
  return 2.0 * std::sqrt(omega * std::max(1.0, r * kmu * n / L) *
                         std::log2(L + r * k * n));
}

struct AdmissibilityReport {
  bool size_ok = false;
  bool nu_ok = false;
  bool p_low_ok = false;   // P >= log2(8 gamma~ sqrt(r)) / 2
  bool p_high_ok = false;  // P <= log2(8 gamma~ sqrt(r))
  bool p_range_ok = false;
  double gamma_tilde = 0.0;
  double p_lower = 0.0;
  double p_upper = 0.0;

  bool admissible() const { return size_ok && nu_ok && p_range_ok; }
};

/// Checks the three conditions of an omega-admissible partition:
/// balanced set sizes, nu <= 1/32, and P inside the gamma~-bracket.
inline AdmissibilityReport verify_admissible(const Partition& part,
                                             const MeasurementEnsemble& ens,
                                             double omega) {
  if (omega < 1.0) throw DimensionError("verify_admissible: omega >= 1");
  AdmissibilityReport rep;
  rep.size_ok = true;
  for (const auto& s : part.sets) {
    double sz = static_cast<double>(s.size());
    rep.size_ok = rep.size_ok && sz >= 0.5 * part.q && sz <= 1.5 * part.q;
  }
  rep.nu_ok = part.nu_achieved <= 1.0 / 32.0;
  rep.gamma_tilde = gamma_tilde(ens, omega);
  double bound = std::log2(8.0 * rep.gamma_tilde *
                           std::sqrt(static_cast<double>(ens.r())));
  rep.p_lower = 0.5 * bound;
  rep.p_upper = bound;
  rep.p_low_ok = static_cast<double>(part.p_count) >= rep.p_lower;
  rep.p_high_ok = static_cast<double>(part.p_count) <= rep.p_upper;
  rep.p_range_ok = rep.p_low_ok && rep.p_high_ok;
  return rep;
}

/// The two inner maxima of the mu_h^2 definition, before the L factor:
/// max |b*_{i,l} h_i|^2 and max |b*_{i,l} S_{i,p} h_i|^2.
inline std::pair<double, double> mu_h_terms(const Partition& part,
                                            const MeasurementEnsemble& ens,
                                            const std::vector<Vec>& channels) {
  if (static_cast<int>(channels.size()) != ens.r())
    throw DimensionError("mu_h: channel count differs from ensemble");
  double direct = 0.0, corrected = 0.0;
  for (int i = 0; i < ens.r(); ++i) {
    if (std::abs(channels[i].norm() - 1.0) > 1e-8)
      throw NormalizationError("mu_h: channel vectors must be unit-norm");
    const Mat& b = ens.blocks[i].basis.entries;
    direct = std::max(direct, (b * channels[i]).cwiseAbs2().maxCoeff());
    for (int p = 0; p < part.p_count; ++p) {
      Vec sh = part.s(i, p) * channels[i];
      corrected = std::max(corrected, (b * sh).cwiseAbs2().maxCoeff());
    }
  }
  return {direct, corrected};
}

/// mu_h^2 = L max{ max |b*_{i,l} h_i|^2 , max |b*_{i,l} S_{i,p} h_i|^2 },
/// maxima over all l in [L], i in [r], p in [P].
inline double mu_h_sq(const Partition& part, const MeasurementEnsemble& ens,
                      const std::vector<Vec>& channels) {
  auto [direct, corrected] = mu_h_terms(part, ens, channels);
  return static_cast<double>(ens.L) * std::max(direct, corrected);
}

/// ||Z||_B = sqrt(L max_l sum_i ||Z_i* b_{i,l}||^2).
inline double b_norm(const LiftedSignal& x, const MeasurementEnsemble& ens) {
  check_shapes(ens, x);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(ens.L);
  for (int i = 0; i < ens.r(); ++i) {
    const Mat& b = ens.blocks[i].basis.entries;
    // row l of (B X) is b*_l X = (X* b_l)*; squared row norms match.
    acc += (b * x.blocks[i]).rowwise().squaredNorm();
  }
  return std::sqrt(static_cast<double>(ens.L) * acc.maxCoeff());
}

/// Coherence summary of an ensemble, optionally with the partition-
/// dependent mu_h^2 of given unit channel vectors. The two inner maxima
/// of mu_h^2 are reported separately as well.
struct CoherenceReport {
  std::vector<double> mu_sq_per_block;
  std::vector<double> k_mu_per_block;
  double k_mu = 0.0;
  double mu_h_sq = 0.0;
  double mu_h_direct_sq = 0.0;
  double mu_h_corrected_sq = 0.0;
  double gamma_tilde = 0.0;
  double gamma_estimate = 0.0;
};

inline CoherenceReport coherence_report(const MeasurementEnsemble& ens,
                                        double omega, Rng& rng,
                                        const Partition* part = nullptr,
                                        const std::vector<Vec>* channels = nullptr,
                                        int power_iters = 50) {
  CoherenceReport rep;
  for (const auto& b : ens.blocks) {
    rep.mu_sq_per_block.push_back(mu_max(b.basis, ens.L));
    rep.k_mu_per_block.push_back(k_mu_of(b.basis, ens.L));
  }
  rep.k_mu = k_mu_of(ens);
  rep.gamma_tilde = gamma_tilde(ens, omega);
  rep.gamma_estimate = operator_norm_estimate(ens, power_iters, rng);
  if (part != nullptr && channels != nullptr) {
    auto [direct, corrected] = mu_h_terms(*part, ens, *channels);
    const double L = static_cast<double>(ens.L);
    rep.mu_h_direct_sq = L * direct;
    rep.mu_h_corrected_sq = L * corrected;
    rep.mu_h_sq = std::max(rep.mu_h_direct_sq, rep.mu_h_corrected_sq);
  }
  return rep;
}

}  // namespace demix

#endif  // DEMIX_COHERENCE_HPP
