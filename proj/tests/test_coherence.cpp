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

#include <catch2/catch.hpp>

#include "demix/coherence.hpp"
#include "demix/operators.hpp"

using namespace demix;

TEST_CASE("mu_max") {
  SECTION("partial DFT has minimal coherence 1") {
    SubspaceBasis b = build_partial_dft_basis(64, 8);
    REQUIRE(mu_max(b, 64) == Approx(1.0).margin(1e-12));
    REQUIRE(k_mu_of(b, 64) == Approx(8.0).margin(1e-11));
  }

  SECTION("truncated identity attains the upper bound L/K") {
    Mat e = Mat::Zero(8, 2);
    e(0, 0) = 1.0;
    e(1, 1) = 1.0;
    SubspaceBasis b{e, BasisKind::GeneralOrthonormal};
    REQUIRE(mu_max(b, 8) == Approx(4.0).margin(1e-12));
  }

  SECTION("random orthonormal basis lies in [1, L/K] and matches a row scan") {
    Rng rng(3);
    SubspaceBasis b = build_random_orthonormal_basis(64, 4, rng);
    double mu = mu_max(b, 64);
    REQUIRE(mu >= 1.0 - 1e-12);
    REQUIRE(mu <= 16.0 + 1e-12);
    double scan = 0.0;
    for (Eigen::Index l = 0; l < 64; ++l) {
      double row = 0.0;
      for (Eigen::Index k = 0; k < 4; ++k) row += std::norm(b.entries(l, k));
      scan = std::max(scan, row * 64.0 / 4.0);
    }
    REQUIRE(mu == Approx(scan).margin(1e-13));
  }
}

TEST_CASE("construct_partition") {
  SECTION("P = 1 gives the full set and T = Id exactly") {
    Rng rng(5);
    MeasurementEnsemble ens = make_random_ensemble(32, 2, 4, 3, rng);
    Partition part = construct_partition(ens, 1, 0.5, false, rng);
    REQUIRE(part.sets.size() == 1);
    REQUIRE(part.sets[0].size() == 32);
    REQUIRE(part.nu_achieved <= 1e-12);
    for (int i = 0; i < ens.r(); ++i)
      REQUIRE(op_norm(part.t(i, 0) - Mat::Identity(4, 4)) <= 1e-12);
  }

  SECTION("decimated DFT partition is exact") {
    Rng rng(6);
    MeasurementEnsemble ens = make_dft_ensemble(64, 2, 8, 4, rng);
    Partition part = construct_partition(ens, 4, 1.0 / 32.0, true, rng);
    REQUIRE(part.p_count == 4);
    for (const auto& s : part.sets) REQUIRE(s.size() == 16);
    REQUIRE(part.nu_achieved <= 1e-12);
    REQUIRE(part.sets[1][0] == 1);
    REQUIRE(part.sets[1][1] == 5);
  }

  SECTION("decimated output is independent of the stream") {
    Rng rng(7);
    MeasurementEnsemble ens = make_dft_ensemble(64, 1, 8, 4, rng);
    Rng a(1), b(999);
    Partition pa = construct_partition(ens, 4, 1.0 / 32.0, true, a);
    Partition pb = construct_partition(ens, 4, 1.0 / 32.0, true, b);
    REQUIRE(pa.sets == pb.sets);
  }

  SECTION("random assignment succeeds when Q is large enough") {
    Rng rng(8);
    MeasurementEnsemble ens = make_random_ensemble(4096, 1, 2, 1, rng);
    Partition part = construct_partition(ens, 2, 1.0 / 32.0, false, rng);
    REQUIRE(part.nu_achieved <= 1.0 / 32.0);
    for (const auto& s : part.sets) {
      REQUIRE(s.size() >= 1024);
      REQUIRE(s.size() <= 3072);
    }
    // the sets partition [L]
    std::vector<int> seen(4096, 0);
    for (const auto& s : part.sets)
      for (int l : s) seen[l] += 1;
    for (int c : seen) REQUIRE(c == 1);
  }

  SECTION("deterministic given the seed") {
    Rng rng(9);
    MeasurementEnsemble ens = make_random_ensemble(4096, 1, 2, 1, rng);
    Rng a(77), b(77);
    Partition pa = construct_partition(ens, 2, 1.0 / 32.0, false, a);
    Partition pb = construct_partition(ens, 2, 1.0 / 32.0, false, b);
    REQUIRE(pa.sets == pb.sets);
    REQUIRE(pa.nu_achieved == pb.nu_achieved);
  }

  SECTION("exhausted attempts raise with the best nu seen") {
    Rng rng(10);
    MeasurementEnsemble ens = make_dft_ensemble(64, 1, 8, 2, rng);
    try {
      construct_partition(ens, 8, 1.0 / 32.0, false, rng, 5);
      FAIL("expected ConstructionError");
    } catch (const ConstructionError& e) {
      REQUIRE(e.best_nu > 1.0 / 32.0);
      REQUIRE(std::isfinite(e.best_nu));
    }
  }

  SECTION("parameter validation") {
    Rng rng(11);
    MeasurementEnsemble ens = make_dft_ensemble(16, 1, 2, 2, rng);
    REQUIRE_THROWS_AS(construct_partition(ens, 0, 0.1, false, rng),
                      DimensionError);
    REQUIRE_THROWS_AS(construct_partition(ens, 2, 0.0, false, rng),
                      DimensionError);
    REQUIRE_THROWS_AS(construct_partition(ens, 2, 1.5, false, rng),
                      DimensionError);
  }
}

TEST_CASE("partition-of-unity and S-norm bounds") {
  Rng rng(12);
  MeasurementEnsemble ens = make_dft_ensemble(64, 2, 8, 4, rng);
  Partition part = construct_partition(ens, 4, 1.0 / 32.0, true, rng);

  SECTION("sum_p (Q/L) T_{i,p} = Id") {
    for (int i = 0; i < ens.r(); ++i) {
      Mat acc = Mat::Zero(8, 8);
      for (int p = 0; p < part.p_count; ++p)
        acc += (part.q / double(ens.L)) * part.t(i, p);
      REQUIRE(op_norm(acc - Mat::Identity(8, 8)) <= 1e-10);
    }
  }

  SECTION("S T = Id and ||S|| <= 32/31 when nu <= 1/32") {
    REQUIRE(part.nu_achieved <= 1.0 / 32.0);
    for (int i = 0; i < ens.r(); ++i)
      for (int p = 0; p < part.p_count; ++p) {
        REQUIRE(op_norm(part.s(i, p) * part.t(i, p) - Mat::Identity(8, 8)) <=
                1e-10);
        REQUIRE(hermitian_op_norm(part.s(i, p)) <= 32.0 / 31.0 + 1e-12);
      }
  }

  SECTION("random-assignment partition also satisfies the S bound") {
    Rng r2(13);
    MeasurementEnsemble e2 = make_random_ensemble(4096, 1, 2, 1, r2);
    Partition p2 = construct_partition(e2, 2, 1.0 / 32.0, false, r2);
    for (int p = 0; p < 2; ++p)
      REQUIRE(hermitian_op_norm(p2.s(0, p)) <= 32.0 / 31.0 + 1e-12);
  }
}

TEST_CASE("verify_admissible") {
  SECTION("gamma_tilde closed-form value") {
    // L=256, r=4, K=N=8 partial DFT: K_mu = 8, r K_mu N / L = 1,
    // log2(L + rKN) = log2(512) = 9, so gamma~ = 2 sqrt(9) = 6.
    Rng rng(14);
    MeasurementEnsemble ens = make_dft_ensemble(256, 4, 8, 8, rng);
    REQUIRE(gamma_tilde(ens, 1.0) == Approx(6.0).margin(1e-10));
  }

  SECTION("decimated DFT partition: sizes and nu pass") {
    Rng rng(15);
    MeasurementEnsemble ens = make_dft_ensemble(64, 2, 8, 4, rng);
    Partition part = construct_partition(ens, 4, 1.0 / 32.0, true, rng);
    AdmissibilityReport rep = verify_admissible(part, ens, 1.0);
    REQUIRE(rep.size_ok);
    REQUIRE(rep.nu_ok);
  }

  SECTION("P = 1 below the bracket reports which bound failed") {
    Rng rng(16);
    MeasurementEnsemble ens = make_dft_ensemble(256, 4, 8, 8, rng);
    Partition part = construct_partition(ens, 1, 0.5, false, rng);
    AdmissibilityReport rep = verify_admissible(part, ens, 1.0);
    // bracket is [0.5 log2(96), log2(96)] = [3.29, 6.58]; P = 1 is low
    REQUIRE_FALSE(rep.p_low_ok);
    REQUIRE(rep.p_high_ok);
    REQUIRE_FALSE(rep.p_range_ok);
    REQUIRE_FALSE(rep.admissible());
    REQUIRE(rep.p_lower == Approx(0.5 * std::log2(96.0)).margin(1e-10));
  }

  SECTION("omega below 1 raises") {
    Rng rng(17);
    MeasurementEnsemble ens = make_dft_ensemble(16, 1, 2, 2, rng);
    Partition part = construct_partition(ens, 1, 0.5, false, rng);
    REQUIRE_THROWS_AS(verify_admissible(part, ens, 0.5), DimensionError);
  }
}

TEST_CASE("mu_h_sq") {
  SECTION("P=1 with h aligned to the peak row gives K_mu") {
    Rng rng(18);
    MeasurementEnsemble ens = make_random_ensemble(32, 1, 4, 2, rng);
    Partition part = construct_partition(ens, 1, 0.5, false, rng);
    const Mat& b = ens.blocks[0].basis.entries;
    Eigen::Index peak;
    b.rowwise().squaredNorm().maxCoeff(&peak);
    Vec h = b.row(peak).adjoint().normalized();
    double v = mu_h_sq(part, ens, {h});
    REQUIRE(v == Approx(k_mu_of(ens)).margin(1e-10));
  }

  SECTION("never below 1") {
    Rng rng(19);
    for (int trial = 0; trial < 5; ++trial) {
      MeasurementEnsemble ens = make_random_ensemble(64, 2, 4, 2, rng);
      Partition part = construct_partition(ens, 1, 0.5, false, rng);
      std::vector<Vec> h = {rng.unit_vector(4), rng.unit_vector(4)};
      REQUIRE(mu_h_sq(part, ens, h) >= 1.0 - 1e-10);
    }
  }

  SECTION("bounded by (32/31)^2 K_mu for an admissible partition") {
    Rng rng(25);
    MeasurementEnsemble ens = make_dft_ensemble(64, 2, 4, 4, rng);
    Partition part = construct_partition(ens, 4, 1.0 / 32.0, true, rng);
    REQUIRE(part.nu_achieved <= 1.0 / 32.0);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Vec> h = {rng.unit_vector(4), rng.unit_vector(4)};
      double bound = (32.0 / 31.0) * (32.0 / 31.0) * k_mu_of(ens);
      REQUIRE(mu_h_sq(part, ens, h) <= bound + 1e-10);
    }
  }

  SECTION("matches an exhaustive loop") {
    Rng rng(20);
    MeasurementEnsemble ens = make_random_ensemble(8, 1, 2, 2, rng);
    Partition part = construct_partition(ens, 2, 0.9, false, rng, 200);
    Vec h = rng.unit_vector(2);
    double best = 0.0;
    const Mat& b = ens.blocks[0].basis.entries;
    for (Eigen::Index l = 0; l < 8; ++l) {
      Vec bl = b.row(l).adjoint();
      best = std::max(best, std::norm(bl.dot(h)));
      for (int p = 0; p < part.p_count; ++p) {
        Vec sh = part.s(0, p) * h;
        best = std::max(best, std::norm(bl.dot(sh)));
      }
    }
    REQUIRE(mu_h_sq(part, ens, {h}) == Approx(8.0 * best).margin(1e-12));
  }

  SECTION("P=1 reduces to the direct maximum") {
    Rng rng(21);
    MeasurementEnsemble ens = make_random_ensemble(32, 2, 3, 2, rng);
    Partition part = construct_partition(ens, 1, 0.5, false, rng);
    std::vector<Vec> h = {rng.unit_vector(3), rng.unit_vector(3)};
    auto [direct, corrected] = mu_h_terms(part, ens, h);
    REQUIRE(direct == Approx(corrected).margin(1e-12));
    REQUIRE(mu_h_sq(part, ens, h) == Approx(32.0 * direct).margin(1e-12));
  }

  SECTION("non-unit channel raises") {
    Rng rng(22);
    MeasurementEnsemble ens = make_random_ensemble(16, 1, 2, 2, rng);
    Partition part = construct_partition(ens, 1, 0.5, false, rng);
    Vec h = 2.0 * rng.unit_vector(2);
    REQUIRE_THROWS_AS(mu_h_sq(part, ens, {h}), NormalizationError);
  }
}

TEST_CASE("b_norm") {
  Rng rng(23);
  MeasurementEnsemble ens = make_random_ensemble(32, 2, 4, 3, rng);

  SECTION("zero signal") {
    REQUIRE(b_norm(zero_lifted(ens), ens) == 0.0);
  }

  SECTION("rank-one reduction for r = 1") {
    MeasurementEnsemble one = make_random_ensemble(32, 1, 4, 3, rng);
    Vec h = rng.unit_vector(4);
    Vec m = rng.unit_vector(3);
    LiftedSignal x;
    x.blocks.push_back(h * m.adjoint());
    double direct = std::sqrt(
        32.0 * (one.blocks[0].basis.entries * h).cwiseAbs2().maxCoeff());
    REQUIRE(b_norm(x, one) == Approx(direct).margin(1e-12));
  }

  SECTION("dominated by sqrt(K_mu) ||X||_F") {
    for (int trial = 0; trial < 10; ++trial) {
      LiftedSignal x = zero_lifted(ens);
      for (auto& blk : x.blocks)
        blk = rng.cnormal_matrix(blk.rows(), blk.cols());
      REQUIRE(b_norm(x, ens) <= std::sqrt(k_mu_of(ens)) * norm_f(x) + 1e-10);
    }
  }
}

TEST_CASE("coherence_report") {
  Rng rng(24);
  MeasurementEnsemble ens = make_dft_ensemble(64, 2, 4, 4, rng);
  Partition part = construct_partition(ens, 4, 1.0 / 32.0, true, rng);
  std::vector<Vec> h = {rng.unit_vector(4), rng.unit_vector(4)};
  Rng prng(1);
  CoherenceReport rep = coherence_report(ens, 1.0, prng, &part, &h);
  REQUIRE(rep.mu_sq_per_block.size() == 2);
  REQUIRE(rep.mu_sq_per_block[0] == Approx(1.0).margin(1e-12));
  REQUIRE(rep.k_mu == Approx(4.0).margin(1e-11));
  REQUIRE(rep.mu_h_sq ==
          Approx(std::max(rep.mu_h_direct_sq, rep.mu_h_corrected_sq))
              .margin(1e-12));
  REQUIRE(rep.mu_h_sq >= 1.0 - 1e-10);
  REQUIRE(rep.gamma_tilde == Approx(gamma_tilde(ens, 1.0)).margin(1e-12));
  REQUIRE(rep.gamma_estimate > 0.0);
}
