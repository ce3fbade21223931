#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wdn/builtin.hpp"
#include "wdn/io.hpp"

namespace {

using namespace wdn;

Controller make_controller(const std::string& name, const SystemSetup& setup,
                           const ExperimentConfig& cfg) {
  ControllerConfig cc;
  cc.N = cfg.horizon;
  cc.soft = cfg.soft;
  cc.rho = cfg.rho;
  if (name == "dfmpc") {
    cc.kind = ControllerKind::dfmpc;
  } else if (name == "nompc") {
    cc.kind = ControllerKind::nominal;
  } else if (name.rfind("ctmpc-", 0) == 0) {
    cc.kind = ControllerKind::tightened;
    try {
      cc.tighten_k = std::stod(name.substr(6));
    } catch (const std::exception&) {
      throw ValidationError("bad tightening factor in controller name '" + name + "'");
    }
  } else {
    throw ValidationError("unknown controller '" + name +
                          "' (expected dfmpc, nompc or ctmpc-<k>)");
  }
  return Controller(setup, cc);
}

ScenarioSpec make_scenario(const std::string& name, int days) {
  if (name == "normal") return builtin::normal_scenario(days);
  if (name == "challenging") return builtin::challenging_scenario(days);
  if (name == "extreme") return builtin::extreme_scenario(days);
  throw ValidationError("unknown scenario '" + name + "'");
}

Vector default_h0(const SystemSetup& setup) {
  (void)setup;
  // Mid-box tank levels unless the config pins them.
  return (Vector(2) << 2.25, 2.1).finished();
}

int cmd_identify(const std::string& data_path, const std::string& out_path, double dt,
                 bool verbose) {
  const TrajectoryDataset data = load_dataset_csv(data_path);
  std::vector<EdgeFit> fits;
  fits.reserve(data.edges.size());
  for (size_t e = 0; e < data.edges.size(); ++e)
    fits.push_back(fit_edge_surrogate(data, static_cast<int>(e)));
  auto [cont, wm] = assemble_continuous_model(data, fits);
  LinearTankModel mdl = discretize_rk4(cont, dt);
  const DisturbanceSet em = quantify_from_residuals(wm);
  save_model_json(mdl, out_path);
  std::cout << "identified model with " << mdl.n() << " tanks, " << mdl.m() << " pumps from "
            << data.samples() << " samples\n";
  std::cout << "model-error bounds (diag of E_m):";
  for (int i = 0; i < mdl.n(); ++i) std::cout << ' ' << em.E(i, i);
  std::cout << '\n';
  if (verbose) std::cout << "wrote " << out_path << '\n';
  return 0;
}

int cmd_run(const ExperimentConfig& cfg, const std::string& out_dir, bool verbose) {
  SystemSetup setup = builtin::two_tank_setup();
  Vector h0 = cfg.h0.size() ? cfg.h0 : default_h0(setup);
  if (h0.size() != setup.model.n()) throw ValidationError("config: h0 length mismatch");

  std::vector<Controller> controllers;
  for (const std::string& name : cfg.controllers)
    controllers.push_back(make_controller(name, setup, cfg));
  std::vector<ScenarioSpec> scenarios;
  for (const std::string& name : cfg.scenarios) scenarios.push_back(make_scenario(name, cfg.days));

  std::vector<ClosedLoopTrace> traces;
  const std::vector<CellSummary> cells =
      run_experiment_matrix(controllers, scenarios, h0, cfg.seed, cfg.workers, &traces);

  std::filesystem::create_directories(out_dir);
  save_summary_csv(cells, out_dir + "/summary.csv");
  for (const ClosedLoopTrace& tr : traces)
    save_trace_csv(tr, out_dir + "/trace_" + tr.controller + "_" + tr.scenario + ".csv");
  std::cout << summary_csv_string(cells);
  if (verbose) std::cout << "wrote " << out_dir << "/summary.csv and per-cell traces\n";
  return 0;
}

double loglog_slope(const std::vector<double>& ns, const std::vector<double>& ts) {
  const int k = static_cast<int>(ns.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < k; ++i) {
    const double x = std::log(ns[i]), y = std::log(ts[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

int cmd_bench(const std::string& out_path, bool verbose) {
  const SystemSetup setup = builtin::two_tank_setup();
  const Vector h0 = default_h0(setup);
  IpmOptions opts;
  std::ostringstream table;
  table << "path,N,nvars,median_iter_seconds,objective\n";

  auto solve_sparse_at = [&](int N, double* obj) {
    const StackedSystem st = build_stacked(setup.model, setup.spec, setup.dist, N);
    const Vector prices = setup.price_window(0, N);
    const Vector d_bar = setup.demand_window(0, N);
    const QuadraticCost cost = cost_terms(st, setup.pressure, prices, d_bar, h0);
    const SparseRobustProgram sp = build_sparse(st, h0, d_bar, cost);
    auto [x, rep] = solve_sparse_ipm(sp.qp, opts);
    if (rep.status != SolveStatus::optimal)
      throw SolverError("bench: sparse solve at N=" + std::to_string(N) + " ended " +
                        to_string(rep.status));
    if (obj) *obj = rep.objective;
    table << "sparse," << N << ',' << sp.qp.nvars << ',' << rep.median_iter_seconds() << ','
          << rep.objective << '\n';
    return rep.median_iter_seconds();
  };
  auto solve_dense_at = [&](int N, double* obj) {
    const StackedSystem st = build_stacked(setup.model, setup.spec, setup.dist, N);
    const Vector prices = setup.price_window(0, N);
    const Vector d_bar = setup.demand_window(0, N);
    const QuadraticCost cost = cost_terms(st, setup.pressure, prices, d_bar, h0);
    const DenseRobustProgram dp = build_dense(st, h0, d_bar, cost);
    auto [x, rep] = solve_dense_reference(dp.qp, opts);
    if (rep.status != SolveStatus::optimal)
      throw SolverError("bench: dense solve at N=" + std::to_string(N) + " ended " +
                        to_string(rep.status));
    if (obj) *obj = rep.objective;
    table << "dense," << N << ',' << dp.qp.nvars << ',' << rep.median_iter_seconds() << ','
          << rep.objective << '\n';
    return rep.median_iter_seconds();
  };

  const std::vector<double> sparse_ns = {8, 16, 32, 64};
  const std::vector<double> dense_ns = {2, 4, 8};
  std::vector<double> sparse_ts, dense_ts;
  double obj_sparse8 = 0, obj_dense8 = 0;
  for (double N : sparse_ns)
    sparse_ts.push_back(solve_sparse_at(static_cast<int>(N), N == 8 ? &obj_sparse8 : nullptr));
  for (double N : dense_ns)
    dense_ts.push_back(solve_dense_at(static_cast<int>(N), N == 8 ? &obj_dense8 : nullptr));

  const double sparse_slope = loglog_slope(sparse_ns, sparse_ts);
  const double dense_slope = loglog_slope(dense_ns, dense_ts);
  std::cout << table.str();
  std::cout << "sparse log-log slope (N in {8,16,32,64}): " << sparse_slope << '\n';
  std::cout << "dense log-log slope (N in {2,4,8}): " << dense_slope << '\n';
  const double gap = std::abs(obj_sparse8 - obj_dense8) / (1.0 + std::abs(obj_dense8));
  std::cout << "dense/sparse objective gap at N=8: " << gap << (gap <= 1e-6 ? " (ok)" : " (MISMATCH)")
            << '\n';
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open '" + out_path + "' for writing");
    out << table.str();
    if (verbose) std::cout << "wrote " << out_path << '\n';
  }
  return 0;
}

int cmd_plot(const ExperimentConfig& cfg, const std::string& controller,
             const std::string& scenario, const std::string& out_path) {
  const SystemSetup setup = builtin::two_tank_setup();
  const Vector h0 = cfg.h0.size() ? cfg.h0 : default_h0(setup);
  const Controller ctrl = make_controller(controller, setup, cfg);
  const ScenarioSpec sc = make_scenario(scenario, cfg.days);
  const ClosedLoopTrace trace =
      run_closed_loop(ctrl, h0, sc, sc.days * 24, derive_seed(cfg.seed, 0));
  write_levels_svg(trace, setup.spec, out_path);
  std::cout << "wrote " << out_path << " (" << trace.hours() << " hours, "
            << trace.total_violations() << " violations)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust pump-scheduling MPC toolkit for water distribution networks"};
  app.require_subcommand(1);

  std::string config_path, out_path, data_path, controller = "dfmpc", scenario = "normal";
  std::uint64_t seed = 0;
  bool seed_set = false, workers_set = false, verbose = false;
  int workers = 1;
  double dt = 1.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config JSON");
    sub->add_option("--out", out_path, "output file or directory");
    sub->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
      seed_set = true;
    });
    sub->add_option("--workers", workers, "worker thread override")->each([&](const std::string&) {
      workers_set = true;
    });
    sub->add_flag("--verbose", verbose, "chatty output");
  };

  CLI::App* identify = app.add_subcommand("identify", "fit the tank surrogate from a dataset");
  identify->add_option("--data", data_path, "trajectory dataset CSV")->required();
  identify->add_option("--dt", dt, "discretization step, hours");
  add_common(identify);

  CLI::App* run = app.add_subcommand("run", "closed-loop experiment matrix");
  add_common(run);

  CLI::App* bench = app.add_subcommand("bench", "per-iteration timing sweep");
  add_common(bench);

  CLI::App* plot = app.add_subcommand("plot", "tank level plot for one cell");
  plot->add_option("--controller", controller, "controller name");
  plot->add_option("--scenario", scenario, "scenario name");
  add_common(plot);

  CLI11_PARSE(app, argc, argv);

  try {
    wdn::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = wdn::load_experiment_config(config_path);
    if (seed_set) cfg.seed = seed;
    if (workers_set) cfg.workers = workers;

    if (identify->parsed())
      return cmd_identify(data_path, out_path.empty() ? "model.json" : out_path, dt, verbose);
    if (run->parsed()) return cmd_run(cfg, out_path.empty() ? "out" : out_path, verbose);
    if (bench->parsed()) return cmd_bench(out_path, verbose);
    if (plot->parsed())
      return cmd_plot(cfg, controller, scenario, out_path.empty() ? "levels.svg" : out_path);
  } catch (const wdn::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const wdn::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const wdn::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
