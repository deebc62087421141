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

#ifndef DEMIX_CLI_HPP
#define DEMIX_CLI_HPP

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "demix/io.hpp"

namespace demix {

namespace cli_detail {

inline void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  out << text;
}

inline Bundle read_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw IoError(std::string("invalid JSON: ") + e.what());
  }
  return bundle_from_json(j);
}

/// "a:b:s" inclusive ranges or comma-separated values.
inline std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  if (spec.find(':') != std::string::npos) {
    double a, b, s;
    char c1, c2;
    std::istringstream is(spec);
    is.imbue(std::locale::classic());
    if (!(is >> a >> c1 >> b >> c2 >> s) || c1 != ':' || c2 != ':' || s <= 0.0)
      throw IoError("bad grid spec, expected start:stop:step");
    int count = static_cast<int>(std::llround((b - a) / s)) + 1;
    if (count < 1) throw IoError("empty grid");
    for (int i = 0; i < count; ++i) grid.push_back(a + i * s);
    return grid;
  }
  std::istringstream is(spec);
  is.imbue(std::locale::classic());
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (tok.empty()) continue;
    grid.push_back(std::stod(tok));
  }
  if (grid.empty()) throw IoError("empty grid");
  return grid;
}

/// P following the experiment recipe: clamp(ceil(log2(8 gamma~ sqrt(r))/2),
/// 1, L), bumped upward at most twice when construction fails.
inline Partition auto_partition(const MeasurementEnsemble& ens, double omega,
                                int p_flag, double nu, bool dft_shortcut,
                                int max_attempts, Rng& rng) {
  if (p_flag > 0)
    return construct_partition(ens, p_flag, nu, dft_shortcut, rng,
                               max_attempts);
  double bound =
      0.5 * std::log2(8.0 * gamma_tilde(ens, omega) *
                      std::sqrt(static_cast<double>(ens.r())));
  int p = static_cast<int>(
      std::clamp<double>(std::ceil(bound), 1.0, static_cast<double>(ens.L)));
  for (int bump = 0;; ++bump) {
    try {
      return construct_partition(ens, p + bump, nu, dft_shortcut, rng,
                                 max_attempts);
    } catch (const ConstructionError&) {
      if (bump >= 2) throw;
    }
  }
}

inline std::vector<Vec> normalized_channels(const FactoredSignal& truth) {
  std::vector<Vec> h;
  for (const auto& c : truth.channels) {
    double n = c.norm();
    if (n == 0.0) throw NormalizationError("zero channel in bundle truth");
    h.push_back(c / n);
  }
  return h;
}

}  // namespace cli_detail

/// Entry point behind the `demix` binary. Returns 0 on success, 1 on
/// usage/input errors, 2 on numeric or solver failures.
inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"blind demixing and deconvolution toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::uint64_t seed = 0;
  double omega = 1.0;
  std::string out_path = "-";
  std::string format = "json";
  app.add_option("--seed", seed, "master seed for all randomness");
  app.add_option("--omega", omega, "admissibility parameter omega >= 1");
  app.add_option("--out", out_path, "output file ('-' for stdout)");
  app.add_option("--format", format, "table output format")
      ->check(CLI::IsMember({"csv", "json"}));

  // gen
  auto* gen = app.add_subcommand("gen", "emit an ensemble/truth/observation bundle");
  int g_r = 2, g_k = 4, g_n = 4;
  double g_rho = 4.0, g_tau = 0.0;
  Eigen::Index g_l = 0;
  std::string g_basis = "dft";
  gen->add_option("--r", g_r, "number of sources");
  gen->add_option("--k", g_k, "channel dimension K");
  gen->add_option("--n", g_n, "message dimension N");
  gen->add_option("--rho", g_rho, "oversampling ratio, L = round(rho r (K+N))");
  gen->add_option("--L", g_l, "measurement count (overrides --rho)");
  gen->add_option("--tau", g_tau, "noise norm");
  gen->add_option("--basis", g_basis, "subspace basis kind")
      ->check(CLI::IsMember({"dft", "random"}));

  // solve
  auto* solve = app.add_subcommand("solve", "run a recovery solver on a bundle");
  std::string s_in, s_method;
  ConvexConfig s_convex;
  WirtingerConfig s_wirtinger;
  int s_max_iters = -1;
  std::string s_eta_policy = "double";
  solve->add_option("--in", s_in, "bundle file")->required();
  solve->add_option("--method", s_method, "convex|wirtinger")
      ->required()
      ->check(CLI::IsMember({"convex", "wirtinger"}));
  solve->add_option("--max-iters", s_max_iters, "iteration cap");
  solve->add_option("--tol-rel", s_convex.tol_rel, "relative-change tolerance");
  solve->add_option("--tol-feas", s_convex.tol_feas,
                    "feasibility tolerance, scaled by (1 + ||y||)");
  solve->add_option("--step-ratio", s_convex.step_ratio, "primal/dual balance");
  solve->add_option("--operator-norm-margin", s_convex.operator_norm_margin,
                    "slack in the step-size product");
  solve->add_option("--grad-tol", s_wirtinger.grad_tol, "gradient stopping threshold");
  solve->add_option("--armijo-c", s_wirtinger.armijo_c, "Armijo constant");
  solve->add_option("--shrink", s_wirtinger.shrink, "backtracking shrink factor");
  solve->add_option("--max-backtracks", s_wirtinger.max_backtracks,
                    "line-search trial cap");
  solve->add_option("--eta-init-policy", s_eta_policy, "double|fixed")
      ->check(CLI::IsMember({"double", "fixed"}));

  // shared partition flags (coherence / partition / certify / isometry)
  int p_flag = 0;
  double nu_flag = 1.0 / 32.0;
  int attempts_flag = 50;
  bool no_shortcut = false;

  auto add_partition_flags = [&](CLI::App* cmd) {
    cmd->add_option("--p", p_flag, "partition set count (0 = auto)");
    cmd->add_option("--nu", nu_flag, "target frame deviation nu");
    cmd->add_option("--max-attempts", attempts_flag, "random partition attempts");
    cmd->add_flag("--no-dft-shortcut", no_shortcut,
                  "force the random construction even for DFT bases");
  };

  auto* coherence = app.add_subcommand("coherence", "coherence parameters of a bundle");
  std::string c_in;
  coherence->add_option("--in", c_in, "bundle file")->required();
  add_partition_flags(coherence);

  auto* partition = app.add_subcommand("partition", "construct and verify a partition");
  std::string p_in;
  partition->add_option("--in", p_in, "bundle file")->required();
  add_partition_flags(partition);

  auto* certify = app.add_subcommand("certify", "Golfing dual-certificate run");
  std::string cert_in;
  int cert_power_iters = 50;
  certify->add_option("--in", cert_in, "bundle file (must carry truth)")
      ->required();
  certify->add_option("--power-iters", cert_power_iters,
                      "power iterations for the operator norm");
  add_partition_flags(certify);

  auto* isometry = app.add_subcommand("isometry", "local isometry spectrum");
  std::string iso_in;
  bool iso_with_partition = false;
  isometry->add_option("--in", iso_in, "bundle file (must carry truth)")
      ->required();
  isometry->add_flag("--with-partition", iso_with_partition,
                     "also report per-set weighted spectra");
  add_partition_flags(isometry);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "phase-transition success rates");
  std::string sw_solver = "wirtinger", sw_rho = "0.8:3.2:0.2";
  ExperimentConfig sw_cfg;
  sweep->add_option("--solver", sw_solver, "convex|wirtinger|both")
      ->check(CLI::IsMember({"convex", "wirtinger", "both"}));
  sweep->add_option("--r", sw_cfg.r, "number of sources");
  sweep->add_option("--k", sw_cfg.k, "channel dimension K");
  sweep->add_option("--n", sw_cfg.n, "message dimension N");
  sweep->add_option("--rho", sw_rho, "grid start:stop:step or comma list");
  sweep->add_option("--trials", sw_cfg.trials_per_point, "trials per grid point");
  sweep->add_option("--tau", sw_cfg.tau, "noise norm per trial");

  // noise
  auto* noise = app.add_subcommand("noise", "noise-scaling study (convex)");
  ExperimentConfig nz_cfg;
  nz_cfg.r = 2;
  nz_cfg.k = 4;
  nz_cfg.n = 4;
  nz_cfg.trials_per_point = 10;
  Eigen::Index nz_l = 128;
  std::string nz_taus = "1e-3,3e-3,1e-2,3e-2,1e-1";
  noise->add_option("--r", nz_cfg.r, "number of sources");
  noise->add_option("--k", nz_cfg.k, "channel dimension K");
  noise->add_option("--n", nz_cfg.n, "message dimension N");
  noise->add_option("--L", nz_l, "measurement count");
  noise->add_option("--taus", nz_taus, "comma list of noise norms");
  noise->add_option("--trials", nz_cfg.trials_per_point, "trials per tau");

  std::vector<char*> argv;
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("demix");
  for (auto& a : args) storage.push_back(a);
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    Rng rng(seed);

    if (gen->parsed()) {
      Eigen::Index L = g_l > 0
                           ? g_l
                           : std::max<Eigen::Index>(
                                 std::llround(g_rho * g_r * (g_k + g_n)),
                                 std::max(g_k, g_n));
      MeasurementEnsemble ens =
          g_basis == "dft" ? make_dft_ensemble(L, g_r, g_k, g_n, rng)
                           : make_random_ensemble(L, g_r, g_k, g_n, rng);
      FactoredSignal truth;
      for (int i = 0; i < g_r; ++i) {
        truth.channels.push_back(rng.cnormal_vector(g_k));
        truth.messages.push_back(rng.cnormal_vector(g_n));
      }
      Observation obs = synthesize_observation(ens, truth, g_tau, rng);
      Bundle b{std::move(ens), std::move(obs), std::move(truth)};
      cli_detail::write_output(out_path, bundle_to_json(b).dump(2));
      return 0;
    }

    if (solve->parsed()) {
      Bundle b = cli_detail::read_bundle(s_in);
      Json j;
      if (s_method == "convex") {
        if (s_max_iters >= 0) s_convex.max_iters = s_max_iters;
        SolverResult res = solve_nuclear(b.ensemble, b.observation, s_convex);
        j = solver_result_to_json(res);
        if (b.truth) {
          Json flags = Json::array();
          for (bool ok : success(res.estimate, lift(*b.truth)))
            flags.push_back(ok);
          j["block_success"] = std::move(flags);
        }
      } else {
        if (s_max_iters >= 0) s_wirtinger.max_iters = s_max_iters;
        s_wirtinger.eta_init_policy = s_eta_policy == "double"
                                          ? EtaInitPolicy::DoublePrevious
                                          : EtaInitPolicy::FixedInverseLipschitz;
        WirtingerResult res =
            solve_wirtinger(b.ensemble, b.observation, s_wirtinger);
        j = wirtinger_result_to_json(res);
        if (b.truth) {
          Json flags = Json::array();
          for (bool ok : success(res.estimate, lift(*b.truth)))
            flags.push_back(ok);
          j["block_success"] = std::move(flags);
        }
      }
      cli_detail::write_output(out_path, j.dump(2));
      return 0;
    }

    if (coherence->parsed()) {
      Bundle b = cli_detail::read_bundle(c_in);
      Partition part = cli_detail::auto_partition(
          b.ensemble, omega, p_flag, nu_flag, !no_shortcut, attempts_flag, rng);
      CoherenceReport rep;
      if (b.truth) {
        std::vector<Vec> h = cli_detail::normalized_channels(*b.truth);
        rep = coherence_report(b.ensemble, omega, rng, &part, &h);
      } else {
        rep = coherence_report(b.ensemble, omega, rng);
      }
      Json j = coherence_report_to_json(rep);
      j["P"] = part.p_count;
      j["nu_achieved"] = part.nu_achieved;
      cli_detail::write_output(out_path, j.dump(2));
      return 0;
    }

    if (partition->parsed()) {
      Bundle b = cli_detail::read_bundle(p_in);
      Partition part = cli_detail::auto_partition(
          b.ensemble, omega, p_flag, nu_flag, !no_shortcut, attempts_flag, rng);
      Json j;
      j["P"] = part.p_count;
      j["Q"] = part.q;
      Json sizes = Json::array();
      for (const auto& s : part.sets) sizes.push_back(s.size());
      j["set_sizes"] = std::move(sizes);
      j["nu_achieved"] = part.nu_achieved;
      j["admissibility"] =
          admissibility_to_json(verify_admissible(part, b.ensemble, omega));
      cli_detail::write_output(out_path, j.dump(2));
      return 0;
    }

    if (certify->parsed()) {
      Bundle b = cli_detail::read_bundle(cert_in);
      if (!b.truth) throw IoError("certify needs a bundle with ground truth");
      Partition part = cli_detail::auto_partition(
          b.ensemble, omega, p_flag, nu_flag, !no_shortcut, attempts_flag, rng);
      GolfingTrace trace = golfing_run(b.ensemble, *b.truth, part);
      double gamma = operator_norm_estimate(b.ensemble, cert_power_iters, rng);
      DualConditionReport rep = verify_dual_conditions(trace, gamma);
      Json j = golfing_trace_to_json(trace);
      j["gamma"] = gamma;
      j["P"] = part.p_count;
      j["cond1_ok"] = rep.cond1_ok;
      j["cond2_ok"] = rep.cond2_ok;
      j["alpha_bound"] = rep.alpha_bound;
      j["margin"] = rep.margin;
      cli_detail::write_output(out_path, j.dump(2));
      return 0;
    }

    if (isometry->parsed()) {
      Bundle b = cli_detail::read_bundle(iso_in);
      if (!b.truth) throw IoError("isometry needs a bundle with ground truth");
      FactoredSignal normalized = *b.truth;
      for (auto& h : normalized.channels) {
        double n = h.norm();
        if (n == 0.0) throw NormalizationError("zero channel in bundle truth");
        h /= n;
      }
      TangentFrame frame = make_tangent_frame(normalized);
      IsometrySpectrum spec;
      if (iso_with_partition) {
        Partition part = cli_detail::auto_partition(b.ensemble, omega, p_flag,
                                                    nu_flag, !no_shortcut,
                                                    attempts_flag, rng);
        spec = local_isometry_spectrum(b.ensemble, frame, &part);
      } else {
        spec = local_isometry_spectrum(b.ensemble, frame);
      }
      cli_detail::write_output(out_path, isometry_to_json(spec).dump(2));
      return 0;
    }

    if (sweep->parsed()) {
      sw_cfg.master_seed = seed;
      sw_cfg.omega = omega;
      sw_cfg.rho_grid = cli_detail::parse_grid(sw_rho);
      sw_cfg.solver = sw_solver == "convex"
                          ? SolverKind::Convex
                          : (sw_solver == "wirtinger" ? SolverKind::Wirtinger
                                                      : SolverKind::Both);
      PhaseTransitionTable table = phase_transition_sweep(sw_cfg);
      cli_detail::write_output(out_path, format == "csv"
                                             ? phase_table_to_csv(table)
                                             : phase_table_to_json(table).dump(2));
      return 0;
    }

    if (noise->parsed()) {
      nz_cfg.master_seed = seed;
      nz_cfg.omega = omega;
      NoiseTable table =
          noise_scaling_study(nz_cfg, cli_detail::parse_grid(nz_taus), nz_l);
      cli_detail::write_output(out_path, format == "csv"
                                             ? noise_table_to_csv(table)
                                             : noise_table_to_json(table).dump(2));
      return 0;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace demix

#endif  // DEMIX_CLI_HPP
