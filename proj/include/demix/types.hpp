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

#ifndef DEMIX_TYPES_HPP
#define DEMIX_TYPES_HPP

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "demix/errors.hpp"

namespace demix {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

enum class BasisKind { PartialDFT, GeneralOrthonormal };

/// L x K matrix B with orthonormal columns, B*B = Id_K. Its conjugated
/// rows b_l (the columns of B*) are the per-measurement channel frames.
struct SubspaceBasis {
  Mat entries;
  BasisKind kind = BasisKind::GeneralOrthonormal;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

/// L x N matrix C with i.i.d. CN(0,1) entries. Row l, transposed without
/// conjugation, is the encoding vector c_l of measurement l.
struct Encoder {
  Mat entries;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

/// The r (B_i, C_i) pairs sharing L measurement rows. Immutable after
/// construction; defines the lifted operators A, A_i and their adjoints.
struct MeasurementEnsemble {
  struct Block {
    SubspaceBasis basis;
    Encoder encoder;
  };

  Eigen::Index L = 0;
  std::vector<Block> blocks;

  int r() const { return static_cast<int>(blocks.size()); }
  Eigen::Index k(int i) const { return blocks[i].basis.cols(); }
  Eigen::Index n(int i) const { return blocks[i].encoder.cols(); }

  Eigen::Index k_max() const {
    Eigen::Index k = 0;
    for (const auto& b : blocks) k = std::max(k, b.basis.cols());
    return k;
  }
  Eigen::Index n_max() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks) n = std::max(n, b.encoder.cols());
    return n;
  }

  void check() const {
    if (blocks.empty()) throw DimensionError("ensemble has no blocks");
    for (const auto& b : blocks) {
      if (b.basis.rows() != L || b.encoder.rows() != L)
        throw DimensionError("basis/encoder row count differs from L");
      if (b.basis.cols() < 1 || b.basis.cols() > L)
        throw DimensionError("basis width must satisfy 1 <= K <= L");
    }
  }
};

/// Element of the lifted space M: a tuple of r complex K_i x N_i blocks.
struct LiftedSignal {
  std::vector<Mat> blocks;

  int r() const { return static_cast<int>(blocks.size()); }

  LiftedSignal& operator+=(const LiftedSignal& o) {
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] += o.blocks[i];
    return *this;
  }
  LiftedSignal& operator-=(const LiftedSignal& o) {
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] -= o.blocks[i];
    return *this;
  }
  LiftedSignal& operator*=(Cplx a) {
    for (auto& b : blocks) b *= a;
    return *this;
  }

  friend LiftedSignal operator+(LiftedSignal a, const LiftedSignal& b) {
    a += b;
    return a;
  }
  friend LiftedSignal operator-(LiftedSignal a, const LiftedSignal& b) {
    a -= b;
    return a;
  }
  friend LiftedSignal operator*(Cplx a, LiftedSignal x) {
    x *= a;
    return x;
  }
};

/// Zero lifted signal with the ensemble's block shapes.
inline LiftedSignal zero_lifted(const MeasurementEnsemble& ens) {
  LiftedSignal x;
  x.blocks.reserve(ens.blocks.size());
  for (const auto& b : ens.blocks)
    x.blocks.push_back(Mat::Zero(b.basis.cols(), b.encoder.cols()));
  return x;
}

inline void check_shapes(const MeasurementEnsemble& ens,
                         const LiftedSignal& x) {
  if (x.r() != ens.r())
    throw DimensionError("lifted signal block count differs from ensemble");
  for (int i = 0; i < ens.r(); ++i) {
    if (x.blocks[i].rows() != ens.k(i) || x.blocks[i].cols() != ens.n(i))
      throw DimensionError("lifted block shape differs from ensemble");
  }
}

/// Block-wise Frobenius inner product <W,Z> = sum_i Tr(W_i Z_i*);
/// linear in the first argument.
inline Cplx inner_f(const LiftedSignal& w, const LiftedSignal& z) {
  Cplx s = 0.0;
  for (std::size_t i = 0; i < w.blocks.size(); ++i)
    s += (w.blocks[i].array() * z.blocks[i].array().conjugate()).sum();
  return s;
}

inline double norm_f_sq(const LiftedSignal& x) {
  double s = 0.0;
  for (const auto& b : x.blocks) s += b.squaredNorm();
  return s;
}

inline double norm_f(const LiftedSignal& x) { return std::sqrt(norm_f_sq(x)); }

inline double nuclear_norm(const Mat& m) {
  return Eigen::JacobiSVD<Mat>(m).singularValues().sum();
}

inline double nuclear_norm(const LiftedSignal& x) {
  double s = 0.0;
  for (const auto& b : x.blocks) s += nuclear_norm(b);
  return s;
}

inline double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

inline bool all_finite(const LiftedSignal& x) {
  for (const auto& b : x.blocks)
    if (!b.allFinite()) return false;
  return true;
}

/// Factored representation: channel vectors h_i (length K_i) and message
/// vectors x_i (length N_i). The lift h_i x_i* forgets the common scaling.
struct FactoredSignal {
  std::vector<Vec> channels;
  std::vector<Vec> messages;

  int r() const { return static_cast<int>(channels.size()); }
};

/// X_i = h_i x_i*.
inline LiftedSignal lift(const FactoredSignal& f) {
  LiftedSignal x;
  x.blocks.reserve(f.channels.size());
  for (std::size_t i = 0; i < f.channels.size(); ++i)
    x.blocks.push_back(f.channels[i] * f.messages[i].adjoint());
  return x;
}

/// Measurement vector y of length L together with the noise-norm bound tau
/// under which it was synthesized (||e|| <= tau, with equality by design).
struct Observation {
  Vec y;
  double tau = 0.0;
};

}  // namespace demix

#endif  // DEMIX_TYPES_HPP
