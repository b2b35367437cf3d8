#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>

#include "json.hpp"
#include "tcmerton/errors.hpp"
#include "tcmerton/io.hpp"
#include "tcmerton/pipeline.hpp"
#include "tcmerton/verify.hpp"

namespace tcm::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

RunConfig load(const CommandOptions& opts) {
  RunConfig cfg = load_config(opts.config);
  if (opts.seed) cfg.mc.seed = *opts.seed;
  if (opts.t0) cfg.mc.t0 = *opts.t0;
  if (opts.x0) {
    if (!(*opts.x0 > 0.0)) throw ValidationError("x0", "must be > 0");
    cfg.mc.x0 = *opts.x0;
  }
  if (!(cfg.mc.t0 >= 0.0 && cfg.mc.t0 < cfg.problem.horizon()))
    throw ValidationError("t0", "must lie in [0,T)");
  return cfg;
}

json grid_json(const Grid& g) {
  return {{"n_t", g.n_t()}, {"n_y", g.n_y()}, {"T", g.horizon()}, {"y_min", g.y_min()},
          {"y_max", g.y_max()}};
}

json config_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries) j[k] = v;
  return j;
}

std::vector<std::size_t> value_rows(const Grid& g, std::size_t stride) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < g.n_t(); i += stride) rows.push_back(i);
  if (rows.back() != g.n_t() - 1) rows.push_back(g.n_t() - 1);
  return rows;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto k = static_cast<std::size_t>(pos);
  if (k + 1 >= v.size()) return v.back();
  return v[k] + (pos - static_cast<double>(k)) * (v[k + 1] - v[k]);
}

json distribution(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  return {{"mean", mean},
          {"q05", quantile(v, 0.05)},
          {"q25", quantile(v, 0.25)},
          {"q50", quantile(v, 0.5)},
          {"q75", quantile(v, 0.75)},
          {"q95", quantile(v, 0.95)}};
}

PdeOptions pde_options(const RunConfig& cfg) { return cfg.fixed_point_options().pde; }

}  // namespace

fs::path output_dir(const RunConfig& cfg, const CommandOptions& opts) {
  if (opts.out) return *opts.out;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return cfg.output.directory;
}

int cmd_solve(const CommandOptions& opts, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig cfg = load(opts);
  const fs::path dir = output_dir(cfg, opts);
  const Grid grid = cfg.make_grid();

  std::vector<double> history;
  FixedPointOptions fp = cfg.fixed_point_options();
  fp.on_iteration = [&](const IterationRecord& r) {
    history.push_back(r.residual);
    log << "iteration " << r.iteration << ": residual " << r.residual << " damping " << r.damping
        << " (" << r.seconds << " s)\n";
  };
  fp.on_warning = [&](const std::string& w) { log << "warning: " << w << "\n"; };

  json meta;
  meta["command"] = "solve";
  meta["grid"] = grid_json(grid);
  meta["config"] = config_json(cfg);

  std::optional<Solution> sol;
  try {
    sol.emplace(solve(cfg.problem, grid, fp));
  } catch (const ConvergenceError& e) {
    meta["status"] = "not_converged";
    meta["message"] = e.what();
    meta["residual_history"] = e.residual_history();
    meta["runtimes"] = {{"total", seconds_since(start)}};
    write_text_file(dir / "meta.json", meta.dump(2) + "\n");
    log << "error: " << e.what() << "\n";
    return 1;
  }

  const NamedField rho[] = {{"rho_bar", &sol->rho.phi}};
  write_fields_csv(dir / "rho_bar.csv", rho);
  const NamedField pb[] = {{"pbar", &sol->pbar.pbar}, {"pbar_y", &sol->pbar.pbar_y}};
  write_fields_csv(dir / "pbar.csv", pb);
  write_strategy_csv(dir / "strategy.csv", *sol);
  const auto rows = value_rows(sol->grid, cfg.output.value_t_stride);
  write_value_csv(dir / "value.csv",
                  value_function(sol->value, sol->interp, rows, cfg.output.value_wealth));

  meta["status"] = "converged";
  meta["iterations"] = sol->rho.iterations;
  meta["residual"] = sol->rho.residual_sup;
  meta["residual_history"] = sol->rho.residual_history;
  meta["kappa"] = sol->rho.kappa;
  meta["damping"] = sol->rho.damping;
  meta["max_abs_rho_y"] = sol->rho.max_abs_phi_y;
  meta["kappa_respected"] = sol->rho.kappa_respected;
  meta["monotone_residuals"] = sol->rho.monotone_residuals;
  meta["files"] = {"rho_bar.csv", "pbar.csv", "strategy.csv", "value.csv"};
  meta["runtimes"] = {{"fixed_point", sol->timings.fixed_point},
                      {"pbar", sol->timings.pbar},
                      {"value", sol->timings.value},
                      {"total", seconds_since(start)}};
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
  log << "converged after " << sol->rho.iterations << " iterations, residual "
      << sol->rho.residual_sup << "; wrote " << dir.string() << "\n";
  return 0;
}

int cmd_simulate(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = load(opts);
  const fs::path dir = output_dir(cfg, opts);
  const json meta = json::parse(read_text_file(dir / "meta.json"));
  if (meta.value("status", "") != "converged")
    throw IntegrityError((dir / "meta.json").string() + ": solve did not converge");

  ScalarField2D phi = read_field_csv(dir / "rho_bar.csv", "rho_bar");
  const Grid expected = cfg.make_grid();
  const Grid& got = phi.grid();
  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
  if (got.n_t() != expected.n_t() || got.n_y() != expected.n_y() ||
      !close(got.y_min(), expected.y_min()) || !close(got.y_max(), expected.y_max()) ||
      !close(got.horizon(), expected.horizon()))
    throw IntegrityError("rho_bar.csv grid does not match the config; re-run solve");

  RhoField rho{.phi = std::move(phi),
               .residual_sup = meta.at("residual").get<double>(),
               .iterations = meta.at("iterations").get<std::size_t>(),
               .residual_history = meta.at("residual_history").get<std::vector<double>>(),
               .kappa = meta.at("kappa").get<double>(),
               .damping = meta.at("damping").get<double>(),
               .max_abs_phi_y = meta.at("max_abs_rho_y").get<double>(),
               .kappa_respected = meta.at("kappa_respected").get<bool>(),
               .monotone_residuals = meta.at("monotone_residuals").get<bool>()};
  const Solution sol = solve_from_rho(cfg.problem, std::move(rho), pde_options(cfg));

  const double t0 = cfg.mc.t0;
  const double x0 = cfg.mc.x0;
  const std::size_t i0 = sol.grid.t_index(t0);
  const double y0 = invert_pbar(sol.interp, t0, x0);
  const McOptions mc = cfg.mc_options();
  const auto start = std::chrono::steady_clock::now();
  auto st = run_equilibrium(cfg.problem, sol.rho.phi, sol.interp, t0, x0, mc, true,
                            std::min(cfg.mc.export_paths, mc.n_paths));
  const double secs = seconds_since(start);
  write_paths_csv(dir / "paths.csv", st.exported);

  const double g = value_at(sol.value, sol.interp, i0, x0);
  json s;
  s["t0"] = t0;
  s["x0"] = x0;
  s["y0"] = y0;
  s["n_paths"] = mc.n_paths;
  s["dt"] = mc.dt;
  s["seed"] = mc.seed;
  s["antithetic"] = mc.antithetic;
  s["exported_paths"] = st.exported.n_paths;
  s["J"] = {{"mean", st.J.mean}, {"se", st.J.se}, {"samples", st.J.samples}};
  s["G"] = g;
  s["z"] = (st.J.mean - g) / st.J.se;
  s["terminal_wealth"] = distribution(st.terminal_wealth);
  s["mean_consumption_rate"] = distribution(st.mean_consumption);
  s["wealth_identity_gap"] = distribution(st.gaps);
  s["n_exited"] = st.n_exited;
  write_text_file(dir / "summary.json", s.dump(2) + "\n");
  log << "J = " << st.J.mean << " +- " << st.J.se << ", G = " << g << " (" << secs << " s); wrote "
      << dir.string() << "\n";
  return 0;
}

int cmd_verify(const CommandOptions& opts, std::ostream& out, std::ostream& log) {
  const RunConfig cfg = load(opts);
  const fs::path dir = output_dir(cfg, opts);
  const Grid grid = cfg.make_grid();
  const Problem& p = cfg.problem;
  VerificationReport report;

  FixedPointOptions fp = cfg.fixed_point_options();
  fp.on_warning = [&](const std::string& w) { log << "warning: " << w << "\n"; };
  auto start = std::chrono::steady_clock::now();
  std::optional<Solution> sol;
  try {
    sol.emplace(solve(p, grid, fp));
  } catch (const ConvergenceError& e) {
    report.add({"fixed_point.residual", Status::kFail,
                e.residual_history().empty() ? NAN : e.residual_history().back(), fp.tol,
                seconds_since(start), e.what()});
    write_text_file(dir / "report.json", report.to_json() + "\n");
    out << report.to_table();
    return 1;
  }
  log << "solved in " << seconds_since(start) << " s\n";
  {
    std::ostringstream os;
    os << sol->rho.iterations << " updates, history";
    for (double r : sol->rho.residual_history) os << " " << r;
    report.add({"fixed_point.residual",
                sol->rho.residual_sup <= fp.tol ? Status::kPass : Status::kFail,
                sol->rho.residual_sup, fp.tol, sol->timings.fixed_point, os.str()});
  }
  if (p.utility.is_crra()) {
    double flat = 0.0;
    for (std::size_t i = 0; i < grid.n_t(); ++i) {
      const auto row = sol->rho.phi.row(i);
      const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
      flat = std::max(flat, *hi - *lo);
    }
    report.add({"fixed_point.crra_flatness", flat < 1e-4 ? Status::kPass : Status::kFail, flat,
                1e-4, 0.0, "max over t of the spread of rho_bar in y"});
  }
  for (auto& e : check_bounds_suite(*sol)) report.add(std::move(e));
  report.add(check_first_order_conditions(*sol));
  report.add(check_terminal_value(*sol));
  {
    std::vector<double> times;
    for (double f : {0.0, 0.25, 0.5, 0.75})
      times.push_back(grid.t(static_cast<std::size_t>(std::round(f * (grid.n_t() - 1)))));
    report.add(check_value_gradient(*sol, times, cfg.verify.wealth));
  }

  if (cfg.verify.hjb_refine) {
    const std::size_t ct = (grid.n_t() + 1) / 2;
    const std::size_t cy = (grid.n_y() + 1) / 2;
    if (cy >= 9 && (!fp.pde.richardson || cy % 2 == 1)) {
      start = std::chrono::steady_clock::now();
      try {
        const Solution coarse =
            solve(p, Grid(grid.horizon(), ct, grid.y_min(), grid.y_max(), cy), fp);
        log << "coarse solve in " << seconds_since(start) << " s\n";
        report.add(check_hjb_residual(*sol, &coarse));
      } catch (const Error& e) {
        report.add(check_hjb_residual(*sol, std::string(e.what())));
      }
    } else {
      report.add(check_hjb_residual(*sol, "n_y=" + std::to_string(grid.n_y()) +
                                              " has no usable half-resolution grid"));
    }
  } else {
    report.add(check_hjb_residual(*sol, nullptr));
  }

  if (p.discount.constant_rate() && p.utility.is_crra()) {
    const double gamma = p.utility.terms().front().gamma;
    const MertonOracle oracle(p.market, gamma, p.discount.rho_max());
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.n_t(); i += std::max<std::size_t>(1, grid.n_t() / 20))
      worst = std::max(worst, std::abs(oracle.annuity(grid.t(i)) - oracle.annuity_rk4(grid.t(i))));
    report.add({"merton.annuity_oracle", worst < 1e-10 ? Status::kPass : Status::kFail, worst,
                1e-10, 0.0, "closed-form annuity against RK4"});
    for (auto& e : check_merton_reduction(*sol, oracle, cfg.verify.wealth)) report.add(std::move(e));
  }

  if (cfg.verify.monte_carlo) {
    const auto& v = cfg.verify;
    McOptions mc = cfg.mc_options();
    mc.n_paths = v.value_paths;
    log << "monte carlo: value consistency\n";
    report.add(check_value_mc(*sol, cfg.mc.x0, mc));
    mc.n_paths = v.identity_paths;
    log << "monte carlo: wealth identity\n";
    for (auto& e : check_wealth_identity(*sol, 0.0, cfg.mc.x0, mc, v.identity_dts))
      report.add(std::move(e));
    const auto probes = default_probes(grid);
    log << "monte carlo: operator\n";
    report.add(check_operator_mc(*sol, probes, v.operator_paths, cfg.mc.seed));
    log << "monte carlo: p_bar\n";
    report.add(check_pbar_mc(*sol, probes, v.operator_paths, cfg.mc.seed + 100));
    mc.n_paths = v.perturbation_paths;
    log << "monte carlo: perturbations\n";
    report.add(check_subgame_perturbation(*sol, 0.0, cfg.mc.x0, v.epsilons, mc));
  }

  write_text_file(dir / "report.json", report.to_json() + "\n");
  out << report.to_table();
  out << report.count(Status::kPass) << " pass, " << report.count(Status::kFail) << " fail, "
      << report.count(Status::kWarn) << " warn, " << report.count(Status::kInfo) << " info\n";
  return report.ok(opts.strict) ? 0 : 1;
}

}  // namespace tcm::cli
