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

#ifndef DEMIX_IO_HPP
#define DEMIX_IO_HPP

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "demix/certificate.hpp"
#include "demix/coherence.hpp"
#include "demix/convex.hpp"
#include "demix/harness.hpp"
#include "demix/types.hpp"
#include "demix/wirtinger.hpp"

namespace demix {

using Json = nlohmann::json;

// Complex scalars serialize as [re, im] pairs; matrices as flat pair
// arrays in row-major order with the shape carried by context.

inline Json complex_to_json(Cplx z) { return Json::array({z.real(), z.imag()}); }

inline Json vec_to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_to_json(v[i]));
  return a;
}

inline Json mat_to_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      a.push_back(complex_to_json(m(r, c)));
  return a;
}

inline Cplx complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2)
    throw IoError("expected a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Vec vec_from_json(const Json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = complex_from_json(j[i]);
  return v;
}

inline Mat mat_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(j.size()) != rows * cols)
    throw IoError("matrix entry count does not match its shape");
  Mat m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[idx++]);
  return m;
}

/// Problem bundle: ensemble, tau, observation y, and (optionally) the
/// ground truth used to synthesize it.
struct Bundle {
  MeasurementEnsemble ensemble;
  Observation observation;
  std::optional<FactoredSignal> truth;
};

inline Json bundle_to_json(const Bundle& b) {
  const MeasurementEnsemble& ens = b.ensemble;
  Json j;
  j["L"] = ens.L;
  j["r"] = ens.r();
  Json ks = Json::array(), ns = Json::array(), blocks = Json::array();
  for (int i = 0; i < ens.r(); ++i) {
    ks.push_back(ens.k(i));
    ns.push_back(ens.n(i));
    Json blk;
    blk["kind"] = ens.blocks[i].basis.kind == BasisKind::PartialDFT
                      ? "partial_dft"
                      : "orthonormal";
    blk["basis"] = mat_to_json(ens.blocks[i].basis.entries);
    blk["encoder"] = mat_to_json(ens.blocks[i].encoder.entries);
    blocks.push_back(std::move(blk));
  }
  j["K"] = std::move(ks);
  j["N"] = std::move(ns);
  j["blocks"] = std::move(blocks);
  j["tau"] = b.observation.tau;
  j["y"] = vec_to_json(b.observation.y);
  if (b.truth) {
    Json t;
    Json ch = Json::array(), ms = Json::array();
    for (const auto& h : b.truth->channels) ch.push_back(vec_to_json(h));
    for (const auto& x : b.truth->messages) ms.push_back(vec_to_json(x));
    t["channels"] = std::move(ch);
    t["messages"] = std::move(ms);
    j["truth"] = std::move(t);
  }
  return j;
}

inline Bundle bundle_from_json(const Json& j) {
  Bundle b;
  try {
    b.ensemble.L = j.at("L").get<Eigen::Index>();
    int r = j.at("r").get<int>();
    const Json& ks = j.at("K");
    const Json& ns = j.at("N");
    const Json& blocks = j.at("blocks");
    if (static_cast<int>(blocks.size()) != r ||
        static_cast<int>(ks.size()) != r || static_cast<int>(ns.size()) != r)
      throw IoError("bundle block arrays disagree with r");
    for (int i = 0; i < r; ++i) {
      Eigen::Index k = ks[i].get<Eigen::Index>();
      Eigen::Index n = ns[i].get<Eigen::Index>();
      MeasurementEnsemble::Block blk;
      blk.basis.kind = blocks[i].at("kind").get<std::string>() == "partial_dft"
                           ? BasisKind::PartialDFT
                           : BasisKind::GeneralOrthonormal;
      blk.basis.entries = mat_from_json(blocks[i].at("basis"), b.ensemble.L, k);
      blk.encoder.entries =
          mat_from_json(blocks[i].at("encoder"), b.ensemble.L, n);
      b.ensemble.blocks.push_back(std::move(blk));
    }
    b.observation.tau = j.at("tau").get<double>();
    b.observation.y = vec_from_json(j.at("y"));
    if (j.contains("truth")) {
      FactoredSignal t;
      for (const auto& h : j["truth"].at("channels"))
        t.channels.push_back(vec_from_json(h));
      for (const auto& x : j["truth"].at("messages"))
        t.messages.push_back(vec_from_json(x));
      b.truth = std::move(t);
    }
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed bundle: ") + e.what());
  }
  b.ensemble.check();
  if (b.observation.y.size() != b.ensemble.L)
    throw IoError("bundle y length differs from L");
  return b;
}

inline Json lifted_to_json(const LiftedSignal& x) {
  Json a = Json::array();
  for (const auto& blk : x.blocks) {
    Json j;
    j["rows"] = blk.rows();
    j["cols"] = blk.cols();
    j["data"] = mat_to_json(blk);
    a.push_back(std::move(j));
  }
  return a;
}

inline Json solver_result_to_json(const SolverResult& res) {
  Json j;
  j["estimate"] = lifted_to_json(res.estimate);
  j["iterations"] = res.iterations;
  j["final_objective"] = res.final_objective;
  j["feasibility_gap"] = res.feasibility_gap;
  j["status"] = res.status == SolveStatus::Converged ? "Converged" : "MaxIters";
  j["pd_gap"] = res.pd_gap;
  j["operator_norm"] = res.operator_norm;
  return j;
}

inline Json wirtinger_result_to_json(const WirtingerResult& res) {
  Json j;
  j["estimate"] = lifted_to_json(res.estimate);
  Json ch = Json::array(), ms = Json::array();
  for (const auto& h : res.factored.channels) ch.push_back(vec_to_json(h));
  for (const auto& x : res.factored.messages) ms.push_back(vec_to_json(x));
  j["channels"] = std::move(ch);
  j["messages"] = std::move(ms);
  j["iterations"] = res.iterations;
  j["final_objective"] = res.final_objective;
  j["grad_norm"] = res.grad_norm;
  j["status"] = res.status == SolveStatus::Converged ? "Converged" : "MaxIters";
  j["stalled"] = res.stalled;
  j["degenerate_init"] = res.degenerate_init;
  return j;
}

inline Json coherence_report_to_json(const CoherenceReport& rep) {
  Json j;
  j["mu_sq_per_block"] = rep.mu_sq_per_block;
  j["k_mu_per_block"] = rep.k_mu_per_block;
  j["k_mu"] = rep.k_mu;
  j["mu_h_sq"] = rep.mu_h_sq;
  j["mu_h_direct_sq"] = rep.mu_h_direct_sq;
  j["mu_h_corrected_sq"] = rep.mu_h_corrected_sq;
  j["gamma_tilde"] = rep.gamma_tilde;
  j["gamma_estimate"] = rep.gamma_estimate;
  return j;
}

inline Json admissibility_to_json(const AdmissibilityReport& rep) {
  Json j;
  j["size_ok"] = rep.size_ok;
  j["nu_ok"] = rep.nu_ok;
  j["p_range_ok"] = rep.p_range_ok;
  j["p_low_ok"] = rep.p_low_ok;
  j["p_high_ok"] = rep.p_high_ok;
  j["gamma_tilde"] = rep.gamma_tilde;
  j["p_lower"] = rep.p_lower;
  j["p_upper"] = rep.p_upper;
  j["admissible"] = rep.admissible();
  return j;
}

inline Json golfing_trace_to_json(const GolfingTrace& trace) {
  Json j;
  j["w_norms"] = trace.w_norms;
  j["mu_seq"] = trace.mu_seq;
  j["alpha_achieved"] = trace.alpha_achieved;
  j["beta_achieved"] = trace.beta_achieved;
  j["z_norm"] = trace.z_norm;
  return j;
}

inline Json isometry_to_json(const IsometrySpectrum& spec) {
  Json j;
  j["min_eig"] = spec.min_eig;
  j["max_eig"] = spec.max_eig;
  Json per = Json::array();
  for (auto [lo, hi] : spec.per_set) {
    Json e;
    e["min_eig"] = lo;
    e["max_eig"] = hi;
    per.push_back(std::move(e));
  }
  j["per_set"] = std::move(per);
  return j;
}

namespace detail {

inline std::string csv_double(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace detail

inline Json phase_table_to_json(const PhaseTransitionTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    Json j;
    j["solver"] = solver_name(r.solver);
    j["r"] = r.r;
    j["K"] = r.k;
    j["N"] = r.n;
    j["L"] = r.L;
    j["rho"] = r.rho;
    j["trials"] = r.trials;
    j["successes"] = r.successes;
    if (r.success_rate)
      j["success_rate"] = *r.success_rate;
    else
      j["success_rate"] = nullptr;
    j["mean_iterations"] = r.mean_iterations;
    j["mean_seconds"] = r.mean_seconds;
    rows.push_back(std::move(j));
  }
  return Json{{"rows", std::move(rows)}};
}

/// Fixed column order; '.' decimal, no separators; empty cell for a null
/// success rate.
inline std::string phase_table_to_csv(const PhaseTransitionTable& table) {
  std::string out =
      "solver,r,K,N,L,rho,trials,successes,success_rate,mean_iterations,"
      "mean_seconds\n";
  for (const auto& r : table.rows) {
    out += solver_name(r.solver);
    out += ',' + std::to_string(r.r) + ',' + std::to_string(r.k) + ',' +
           std::to_string(r.n) + ',' + std::to_string(r.L) + ',' +
           detail::csv_double(r.rho) + ',' + std::to_string(r.trials) + ',' +
           std::to_string(r.successes) + ',';
    if (r.success_rate) out += detail::csv_double(*r.success_rate);
    out += ',' + detail::csv_double(r.mean_iterations) + ',' +
           detail::csv_double(r.mean_seconds) + '\n';
  }
  return out;
}

inline Json noise_table_to_json(const NoiseTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    Json j;
    j["tau"] = r.tau;
    j["mean_error"] = r.mean_error;
    j["theorem_bound_value"] = r.theorem_bound_value;
    rows.push_back(std::move(j));
  }
  Json j;
  j["rows"] = std::move(rows);
  j["fitted_constant"] = table.fitted_constant;
  j["geometry_factor"] = table.geometry_factor;
  return j;
}

inline std::string noise_table_to_csv(const NoiseTable& table) {
  std::string out = "tau,mean_error,theorem_bound_value\n";
  for (const auto& r : table.rows)
    out += detail::csv_double(r.tau) + ',' + detail::csv_double(r.mean_error) +
           ',' + detail::csv_double(r.theorem_bound_value) + '\n';
  return out;
}

}  // namespace demix

#endif  // DEMIX_IO_HPP
