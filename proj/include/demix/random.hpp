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

#ifndef DEMIX_RANDOM_HPP
#define DEMIX_RANDOM_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace demix {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Folds the given words into one 64-bit seed. Used to derive independent
/// per-trial substreams from (master seed, tag, parameter, index) tuples;
/// the result is a pure function of the inputs.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t s = 0x243f6a8885a308d3ULL;
  for (std::uint64_t p : parts) {
    s ^= p;
    s = splitmix64(s);
  }
  return s;
}

inline std::uint64_t double_bits(double x) {
  std::uint64_t u;
  static_assert(sizeof(u) == sizeof(x));
  std::memcpy(&u, &x, sizeof(u));
  return u;
}

/// Seeded random stream. All sampling in the library goes through an
/// explicit Rng so that parallel callers can use independent streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double gaussian() { return normal_(gen_); }

  /// CN(0,1): real and imaginary parts independent N(0, 1/2).
  std::complex<double> cnormal() {
    static const double k = 1.0 / std::sqrt(2.0);
    return {gaussian() * k, gaussian() * k};
  }

  /// Uniform integer in [0, n).
  int below(int n) {
    return std::uniform_int_distribution<int>(0, n - 1)(gen_);
  }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }

  Eigen::VectorXcd cnormal_vector(Eigen::Index n) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cnormal();
    return v;
  }

  Eigen::MatrixXcd cnormal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = cnormal();
    return m;
  }

  /// Uniform direction on the complex unit sphere in C^n.
  Eigen::VectorXcd unit_vector(Eigen::Index n) {
    Eigen::VectorXcd v = cnormal_vector(n);
    double nv = v.norm();
    while (nv == 0.0) {
      v = cnormal_vector(n);
      nv = v.norm();
    }
    return v / nv;
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace demix

#endif  // DEMIX_RANDOM_HPP
