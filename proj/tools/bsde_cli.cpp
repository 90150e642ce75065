// Command-line front end: envelope / check / solve / experiment.
// Exit codes: 0 = all asserted properties passed, 2 = a property failed,
// 1 = operational error (bad usage, bad config, I/O, solver failure).

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bsde/assumptions.hpp"
#include "bsde/convolution.hpp"
#include "bsde/experiments.hpp"
#include "bsde/report.hpp"
#include "bsde/solver.hpp"

namespace {

using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitOperational = 1;
constexpr int kExitPropertyFailure = 2;

int read_worker_count() {
  const char* env = std::getenv("BSDE_WORKERS");
  if (!env) return 1;
  const int w = std::atoi(env);
  if (w < 1) throw std::invalid_argument("BSDE_WORKERS must be a positive integer");
  return w;
}

void emit(const json& payload, const std::string& out_path) {
  const std::string text = payload.dump(2) + "\n";
  std::cout << text;
  if (!out_path.empty()) bsde::write_file(out_path, text);
}

struct CommonOpts {
  std::uint64_t seed = 0;
  std::string out_json;
  std::string out_csv;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--seed", opts.seed, "RNG seed (echoed into every output)")
      ->required();
  cmd->add_option("--out-json", opts.out_json, "write the JSON report here");
  cmd->add_option("--out-csv", opts.out_csv, "write the CSV table here");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BSDE laboratory: envelope approximants, assumption checkers, "
               "regression Monte Carlo solver, theorem experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags override file values");
  app.allow_config_extras(CLI::config_extras_mode::error);

  // ---- envelope ----
  auto* env_cmd = app.add_subcommand(
      "envelope", "evaluate the inf/sup-convolution approximant at a point");
  CommonOpts env_common;
  std::string env_gen = "example1", env_kind = "inf_z";
  int env_n = 1;
  double env_t = 0.5, env_y = 0.0, env_tol = 1e-6, env_T = 1.0;
  std::vector<double> env_b{0.0}, env_z{0.0};
  add_common(env_cmd, env_common);
  env_cmd->add_option("--generator", env_gen, "generator label")->required();
  env_cmd->add_option("--kind", env_kind, "inf_z | sup_z | inf_yz | sup_yz");
  env_cmd->add_option("--n", env_n, "approximation index")->required();
  env_cmd->add_option("--t", env_t, "time point");
  env_cmd->add_option("--T", env_T, "horizon (generators may depend on it)");
  env_cmd->add_option("--y", env_y, "y coordinate");
  env_cmd->add_option("--b", env_b, "Brownian state (one value per component)");
  env_cmd->add_option("--z", env_z, "z coordinate (one value per component)");
  env_cmd->add_option("--tol", env_tol, "certified optimization tolerance");

  // ---- check ----
  auto* check_cmd = app.add_subcommand(
      "check", "run assumption checkers against a generator on a lattice");
  CommonOpts check_common;
  std::string check_gen = "example1";
  std::vector<std::string> check_ids;
  double check_T = 1.0, check_zmax = 1e4;
  int check_d = 1;
  add_common(check_cmd, check_common);
  check_cmd->add_option("--generator", check_gen, "generator label")->required();
  check_cmd
      ->add_option("--assumption", check_ids,
                   "assumption ids (H1, H2, H2', H3, H4, H4', H4'', H4*, H5, "
                   "H1a, remark1); repeatable")
      ->required();
  check_cmd->add_option("--T", check_T, "horizon");
  check_cmd->add_option("--d", check_d, "Brownian dimension");
  check_cmd->add_option("--z-max", check_zmax, "largest |z| magnitude sampled");

  // ---- solve ----
  auto* solve_cmd = app.add_subcommand(
      "solve", "backward regression Monte Carlo solve of BSDE(xi, g)");
  CommonOpts solve_common;
  std::string solve_gen = "example1", solve_term = "BT", solve_basis = "poly";
  double solve_T = 1.0, solve_trunc = 0.0;
  std::size_t solve_N = 50, solve_M = 20000;
  int solve_degree = 3, solve_bins = 50, solve_picard = 20;
  std::string solve_trunc_mode = "clamp";
  add_common(solve_cmd, solve_common);
  solve_cmd->add_option("--generator", solve_gen, "generator label")->required();
  solve_cmd->add_option("--terminal", solve_term, "terminal label")->required();
  solve_cmd->add_option("--T", solve_T, "horizon");
  solve_cmd->add_option("--N", solve_N, "time steps");
  solve_cmd->add_option("--M", solve_M, "Monte Carlo paths");
  solve_cmd->add_option("--basis", solve_basis, "poly | bins");
  solve_cmd->add_option("--degree", solve_degree, "polynomial basis degree");
  solve_cmd->add_option("--bins", solve_bins, "piecewise-constant bin count");
  solve_cmd->add_option("--picard-iters", solve_picard, "implicit-step iterations");
  solve_cmd->add_option("--truncation", solve_trunc,
                        "terminal truncation level (0 = off)");
  solve_cmd->add_option("--truncation-mode", solve_trunc_mode, "clamp | min");

  // ---- experiment ----
  auto* exp_cmd = app.add_subcommand(
      "experiment", "run a theorem experiment and emit verdict tables");
  CommonOpts exp_common;
  bsde::ExperimentSpec spec;
  std::string exp_basis = "poly";
  int exp_degree = 3, exp_bins = 50;
  add_common(exp_cmd, exp_common);
  exp_cmd->add_option("--theorem", spec.theorem,
                      "T1_minimal, T1_maximal, T2_compare, T3_levi, "
                      "T4_lebesgue, T5_discontinuous, T6_compare_disc, "
                      "T7_levi_disc, T8_lebesgue_disc, T9_compare_general, "
                      "T10_uniqueness")
      ->required();
  exp_cmd->add_option("--generator", spec.generator, "generator label");
  exp_cmd->add_option("--terminal", spec.terminal, "terminal label");
  exp_cmd->add_option("--generator2", spec.generator2,
                      "second generator for comparison runs");
  exp_cmd->add_option("--terminal2", spec.terminal2,
                      "second terminal for comparison runs");
  exp_cmd->add_option("--shift", spec.generator2_shift,
                      "g' = g + shift when --generator2 is absent");
  exp_cmd->add_option("--n-list", spec.n_list, "approximation indices");
  exp_cmd->add_option("--levels", spec.levels, "truncation levels");
  exp_cmd->add_option("--T", spec.T, "horizon");
  exp_cmd->add_option("--N", spec.N, "time steps");
  exp_cmd->add_option("--M", spec.M, "Monte Carlo paths");
  exp_cmd->add_option("--envelope-tol", spec.envelope_tol,
                      "optimizer tolerance inside the solver");
  exp_cmd->add_option("--stat-multiple", spec.tol.stat_multiple,
                      "statistical tolerance in stderr multiples");
  exp_cmd->add_option("--slack", spec.tol.deterministic_slack,
                      "deterministic slack for ordering assertions");
  exp_cmd->add_option("--tail-max", spec.tol.tail_ratio_max,
                      "Cauchy tail-ratio threshold");
  exp_cmd->add_flag("--broken-control", spec.broken_control,
                    "T10: add the no-modulus counter-run");
  exp_cmd->add_option("--basis", exp_basis, "poly | bins");
  exp_cmd->add_option("--degree", exp_degree, "polynomial basis degree");
  exp_cmd->add_option("--bins", exp_bins, "piecewise-constant bin count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 prints its own message; fold --help into the pass exit code
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitOperational;
  }

  try {
    read_worker_count();  // validated; modules run single-threaded in v1

    if (*env_cmd) {
      bsde::EnvelopeQuery q;
      q.g = bsde::generator_by_label(env_gen, env_T,
                                     static_cast<int>(env_b.size()));
      q.n = env_n;
      q.kind = bsde::envelope_kind_from_string(env_kind);
      q.point = {env_t, env_b, env_y, env_z};
      q.tol = env_tol;
      const bsde::EnvelopeResult r = bsde::envelope(q);
      json j;
      j["schema_version"] = bsde::kReportSchemaVersion;
      j["config"] = {{"subcommand", "envelope"}, {"generator", env_gen},
                     {"kind", env_kind},         {"n", env_n},
                     {"t", env_t},               {"T", env_T},
                     {"b", env_b},               {"y", env_y},
                     {"z", env_z},               {"tol", env_tol},
                     {"seed", env_common.seed}};
      j["value"] = r.value;
      j["arg_y"] = r.arg_y;
      j["arg_z"] = r.arg_z;
      j["search_radius"] = r.search_radius;
      j["search_radius_y"] = r.search_radius_y;
      j["certified_gap"] = r.certified_gap;
      emit(j, env_common.out_json);
      return kExitPass;
    }

    if (*check_cmd) {
      const bsde::GeneratorSpec g =
          bsde::generator_by_label(check_gen, check_T, check_d);
      const bsde::Lattice lat =
          bsde::default_lattice(check_T, check_d, check_common.seed, check_zmax);
      json j;
      j["schema_version"] = bsde::kReportSchemaVersion;
      j["config"] = {{"subcommand", "check"}, {"generator", check_gen},
                     {"T", check_T},          {"d", check_d},
                     {"z_max", check_zmax},   {"seed", check_common.seed},
                     {"assumptions", check_ids}};
      j["results"] = json::array();
      bool all_pass = true;
      for (const auto& id : check_ids) {
        const bsde::CheckReport rep = bsde::run_check(g, lat, id);
        all_pass = all_pass && rep.pass;
        j["results"].push_back({{"assumption", rep.assumption},
                                {"pass", rep.pass},
                                {"worst_slack", rep.worst_slack},
                                {"empirical_constant", rep.empirical_constant},
                                {"witness_t", rep.witness.t},
                                {"witness_b", rep.witness.b},
                                {"witness_y", rep.witness.y},
                                {"witness_z", rep.witness.z},
                                {"witness2_y", rep.witness2.y},
                                {"witness2_z", rep.witness2.z},
                                {"note", rep.note}});
      }
      j["pass"] = all_pass;
      emit(j, check_common.out_json);
      return all_pass ? kExitPass : kExitPropertyFailure;
    }

    if (*solve_cmd) {
      bsde::SolverConfig cfg;
      cfg.basis.type = solve_basis == "bins"
                           ? bsde::BasisSpec::Type::PiecewiseConstant
                           : bsde::BasisSpec::Type::Polynomial;
      if (solve_basis != "poly" && solve_basis != "bins")
        throw std::invalid_argument("unknown basis: " + solve_basis);
      cfg.basis.degree = solve_degree;
      cfg.basis.bins = solve_bins;
      cfg.picard_iters = solve_picard;
      if (solve_trunc > 0.0) cfg.terminal_truncation = solve_trunc;
      if (solve_trunc_mode == "min")
        cfg.truncation_mode = bsde::TruncationMode::Min;
      else if (solve_trunc_mode != "clamp")
        throw std::invalid_argument("unknown truncation mode: " +
                                    solve_trunc_mode);

      const bsde::GeneratorSpec g =
          bsde::generator_by_label(solve_gen, solve_T, 1);
      const bsde::TerminalCondition xi = bsde::terminal_by_label(solve_term);
      const bsde::PathBundle paths = bsde::simulate_paths(
          bsde::make_grid(solve_T, solve_N), 1, solve_M, solve_common.seed);
      const bsde::SolveResult r = bsde::solve(xi, g, paths, cfg);
      const bsde::Diagnostics diag =
          bsde::diagnostics_report(r, paths.grid);
      json j;
      j["schema_version"] = bsde::kReportSchemaVersion;
      j["config"] = {{"subcommand", "solve"},   {"generator", solve_gen},
                     {"terminal", solve_term},  {"T", solve_T},
                     {"N", solve_N},            {"M", solve_M},
                     {"basis", solve_basis},    {"degree", solve_degree},
                     {"bins", solve_bins},      {"picard_iters", solve_picard},
                     {"truncation", solve_trunc},
                     {"truncation_mode", solve_trunc_mode},
                     {"seed", solve_common.seed}};
      j["y0"] = r.y0;
      j["y0_stderr"] = r.diagnostics.y0_stderr;
      j["eps_reg"] = r.diagnostics.eps_reg;
      j["s_beta"] = diag.s_beta;
      j["m_beta"] = diag.m_beta;
      emit(j, solve_common.out_json);
      return kExitPass;
    }

    // experiment
    spec.seed = exp_common.seed;
    spec.solver.basis.type = exp_basis == "bins"
                                 ? bsde::BasisSpec::Type::PiecewiseConstant
                                 : bsde::BasisSpec::Type::Polynomial;
    if (exp_basis != "poly" && exp_basis != "bins")
      throw std::invalid_argument("unknown basis: " + exp_basis);
    spec.solver.basis.degree = exp_degree;
    spec.solver.basis.bins = exp_bins;
    const bsde::ExperimentReport rep = bsde::run_experiment(spec);
    json echo = {{"subcommand", "experiment"},
                 {"theorem", spec.theorem},
                 {"generator", spec.generator},
                 {"terminal", spec.terminal},
                 {"generator2", spec.generator2},
                 {"terminal2", spec.terminal2},
                 {"shift", spec.generator2_shift},
                 {"n_list", spec.n_list},
                 {"levels", spec.levels},
                 {"T", spec.T},
                 {"N", spec.N},
                 {"M", spec.M},
                 {"envelope_tol", spec.envelope_tol},
                 {"stat_multiple", spec.tol.stat_multiple},
                 {"slack", spec.tol.deterministic_slack},
                 {"tail_max", spec.tol.tail_ratio_max},
                 {"broken_control", spec.broken_control},
                 {"basis", exp_basis},
                 {"seed", spec.seed}};
    emit(bsde::report_to_json(rep, echo), exp_common.out_json);
    if (!exp_common.out_csv.empty())
      bsde::write_file(exp_common.out_csv, bsde::table_to_csv(rep.rows));
    return rep.pass ? kExitPass : kExitPropertyFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOperational;
  }
}
