#include "fvdeg/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <cmath>
#include <exception>
#include <iostream>
#include <new>

#include "fvdeg/config.hpp"
#include "fvdeg/stationary.hpp"

namespace fvdeg::cli {

namespace fs = std::filesystem;
using io::Json;
using io::num;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Convergence: return kSolver;
    case ErrorKind::Verification: return kVerification;
    case ErrorKind::Io: return kIo;
    default: return kValidation;
  }
}

namespace {

template <class Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSolver;
  }
}

void apply_jobs(const Options& opts) {
  if (opts.jobs < 0) throw Error(ErrorKind::Parameter, "--jobs must be nonnegative");
  if (opts.jobs > 0) omp_set_num_threads(opts.jobs);
}

fs::path output_dir(const Options& opts, const RunConfig& c) {
  const fs::path dir = opts.out ? *opts.out : fs::path(c.output.directory);
  io::ensure_directory(dir);
  return dir;
}

bool plots_wanted(const Options& opts, const RunConfig& c) { return opts.emit_plots || c.output.emit_plots; }

Json manifest(const std::string& command, const RunSetup& setup) {
  Json j;
  j["command"] = command;
  j["config"] = to_json(setup);
  return j;
}

double max_relative_drift(const DiscreteSolution& s) {
  const auto drift = mass_drift(s);
  const double m0 = std::abs(total_mass(*s.mesh, s.steps[0]));
  double worst = 0.0;
  for (double d : drift) worst = std::max(worst, std::abs(d) / std::max(m0, 1e-300));
  return worst;
}

DiscreteSolution solution_from_file(const RunSetup& setup, const fs::path& path) {
  auto tr = io::read_trajectory_csv(path, *setup.mesh);
  if (tr.times.size() < 2) throw Error(ErrorKind::Parse, path.string() + ": a trajectory needs at least two times");
  DiscreteSolution s;
  s.mesh = setup.mesh;
  s.model = setup.model;
  s.flux_kind = setup.config.scheme.flux;
  s.mode = setup.config.scheme.mode;
  s.dt = tr.times[1] - tr.times[0];
  if (!(s.dt > 0.0)) throw Error(ErrorKind::Parse, path.string() + ": times must increase");
  for (std::size_t n = 0; n < tr.times.size(); ++n)
    if (std::abs(tr.times[n] - n * s.dt) > 1e-9 * std::max(1.0, tr.times[n]))
      throw Error(ErrorKind::Parse, path.string() + ": times are not equally spaced (time " + num(tr.times[n]) + ")");
  s.T = std::min(setup.model->T, (tr.times.size() - 1) * s.dt);
  for (auto& u : tr.steps) {
    StepStats st;
    st.mass = total_mass(*s.mesh, u);
    st.min_value = *std::min_element(u.begin(), u.end());
    st.max_value = *std::max_element(u.begin(), u.end());
    s.stats.push_back(st);
    s.steps.push_back(std::move(u));
  }
  return s;
}

}  // namespace

int cmd_run(const Options& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    apply_jobs(opts);
    const RunSetup setup = resolve(load_run_config(opts.config));
    const fs::path dir = output_dir(opts, setup.config);
    const auto& sc = setup.config.scheme;
    log << "run: " << setup.model->spec.name << ", " << setup.mesh->num_cells() << " cells, dt = " << num(setup.dt)
        << ", " << to_string(sc.mode) << ", " << to_string(sc.flux) << "\n";
    const DiscreteSolution sol = run_evolution(setup.model, setup.mesh, setup.dt, sc.flux, sc.solver, sc.mode);
    io::write_trajectory_csv(dir / "trajectory.csv", sol);
    io::write_mass_log_csv(dir / "mass_log.csv", sol);
    io::write_profile_csv(dir / "final.csv", *setup.mesh, sol.steps.back(), &sol.steps.front());

    double lo = sol.stats[0].min_value, hi = sol.stats[0].max_value;
    int iters = 0;
    for (const auto& st : sol.stats) {
      lo = std::min(lo, st.min_value);
      hi = std::max(hi, st.max_value);
      iters = std::max(iters, st.iterations);
    }
    Json m = manifest("run", setup);
    m["results"] = {{"steps", sol.num_steps()},
                    {"max_relative_mass_drift", max_relative_drift(sol)},
                    {"min_value", lo},
                    {"max_value", hi},
                    {"max_nonlinear_iterations", iters}};
    m["outputs"] = {"trajectory.csv", "mass_log.csv", "final.csv"};
    if (plots_wanted(opts, setup.config)) {
      io::write_text(dir / "final.gp", io::profile_plot_script({"final.csv"}, setup.model->spec.name, "final.png"));
      m["outputs"].push_back("final.gp");
    }
    io::write_json(dir / "manifest.json", m);
    log << "steps " << sol.num_steps() << ", values in [" << num(lo) << ", " << num(hi)
        << "], max relative mass drift " << num(max_relative_drift(sol)) << "\n";
    return kOk;
  });
}

int cmd_stationary(const Options& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    apply_jobs(opts);
    const RunSetup setup = resolve(load_run_config(opts.config));
    const fs::path dir = output_dir(opts, setup.config);
    const auto& cfg = setup.config;
    StationaryProblem prob{setup.model, setup.mesh, source_cell_averages(*setup.model, *setup.mesh), cfg.scheme.flux};
    StepStats st;
    const auto u = stationary_solve(prob, cfg.scheme.solver, &st);
    io::write_profile_csv(dir / "stationary.csv", *setup.mesh, u, &prob.g, "g");
    Json m = manifest("stationary", setup);
    m["results"] = {{"iterations", st.iterations}, {"residual", st.residual}, {"min", st.min_value},
                    {"max", st.max_value}};
    m["outputs"] = {"stationary.csv"};
    log << "stationary: " << st.iterations << " iterations, residual " << num(st.residual) << "\n";
    int code = kOk;
    if (cfg.diagnostics.second_source) {
      ModelSpec other = cfg.model;
      other.g = *cfg.diagnostics.second_source;
      const Model other_model = make_model(other);
      const auto h = source_cell_averages(other_model, *setup.mesh);
      const ContractionReport r = resolvent_contraction_probe(prob, h, cfg.scheme.solver);
      Json c = {{"second_source", other.g},
                {"solution_l1", r.solution_l1},
                {"source_l1", r.source_l1},
                {"contraction_violation", r.excess},
                {"budget", r.budget},
                {"contraction_violated", r.contraction_violated},
                {"sources_ordered", r.sources_ordered},
                {"order_violation", r.order_violation},
                {"order_violated", r.order_violated}};
      io::write_json(dir / "contraction.json", c);
      m["outputs"].push_back("contraction.json");
      m["results"]["contraction"] = c;
      log << "contraction: |u - v|_1 = " << num(r.solution_l1) << ", |g - h|_1 = " << num(r.source_l1)
          << ", violation " << num(r.excess) << " (budget " << num(r.budget) << ")\n";
      if (r.contraction_violated || r.order_violated) {
        err << "verification failed: resolvent is not an L1 contraction for these sources\n";
        code = kVerification;
      }
    }
    io::write_json(dir / "manifest.json", m);
    return code;
  });
}

int cmd_verify(const Options& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    apply_jobs(opts);
    const RunSetup setup = resolve(load_run_config(opts.config));
    const fs::path dir = output_dir(opts, setup.config);
    const auto& cfg = setup.config;
    const auto& sc = cfg.scheme;
    DiscreteSolution sol;
    if (cfg.diagnostics.trajectory) {
      fs::path p = *cfg.diagnostics.trajectory;
      if (p.is_relative()) p = cfg.base_dir / p;
      sol = solution_from_file(setup, p);
      log << "verify: " << p.string() << " (" << sol.num_steps() << " steps)\n";
    } else {
      sol = run_evolution(setup.model, setup.mesh, setup.dt, sc.flux, sc.solver, sc.mode);
      log << "verify: fresh run, " << sol.num_steps() << " steps\n";
    }
    const auto& d = cfg.diagnostics;
    const EntropyReport rep = entropy_sweep(sol, d.k_grid, d.xi_count);
    const CellEntropyDefect defect = cell_entropy_defect(sol, entropy_k_grid(*setup.model, d.k_grid));
    io::write_entropy_csv(dir / "entropy_sweep.csv", rep);

    const auto& worst = rep.entries[rep.argmin];
    const bool entropy_ok = rep.min_residual >= -d.nu_budget;
    const bool defect_ok = defect.max_defect <= d.defect_budget;
    Json summary = {{"mesh_h", rep.mesh_h},
                    {"dt", rep.dt},
                    {"entries", rep.entries.size()},
                    {"min_residual", rep.min_residual},
                    {"min_residual_k", worst.k},
                    {"min_residual_xi", rep.xi_ids[worst.xi]},
                    {"min_discrete_residual", rep.min_discrete_residual},
                    {"nu_budget", d.nu_budget},
                    {"max_cell_entropy_defect", defect.max_defect},
                    {"defect_step", defect.step},
                    {"defect_time", defect.step >= 0 ? sol.time(defect.step) : 0.0},
                    {"defect_cell", defect.cell},
                    {"defect_k", defect.k},
                    {"defect_budget", d.defect_budget},
                    {"max_relative_mass_drift", max_relative_drift(sol)},
                    {"passed", entropy_ok && defect_ok}};
    io::write_json(dir / "verify_summary.json", summary);
    Json m = manifest("verify", setup);
    m["results"] = summary;
    m["outputs"] = {"entropy_sweep.csv", "verify_summary.json"};
    io::write_json(dir / "manifest.json", m);

    log << "min entropy residual " << num(rep.min_residual) << " at k = " << num(worst.k) << ", "
        << rep.xi_ids[worst.xi] << " (budget -" << num(d.nu_budget) << ")\n"
        << "min discrete entropy residual " << num(rep.min_discrete_residual) << "\n"
        << "max cell entropy defect " << num(defect.max_defect) << " (budget " << num(d.defect_budget) << ")\n";
    if (!defect_ok && defect.cell >= 0) {
      const auto& x = setup.mesh->cell(defect.cell).center;
      err << "verification failed: cell entropy inequality violated by " << num(defect.max_defect) << " at step "
          << defect.step << " (t = " << num(sol.time(defect.step)) << "), cell " << defect.cell << " (x = "
          << num(x[0]) << (setup.mesh->dim() == 2 ? ", y = " + num(x[1]) : std::string()) << "), k = "
          << num(defect.k) << "\n";
    }
    if (!entropy_ok)
      err << "verification failed: entropy residual " << num(rep.min_residual) << " below -" << num(d.nu_budget)
          << " at k = " << num(worst.k) << ", " << rep.xi_ids[worst.xi] << "\n";
    return entropy_ok && defect_ok ? kOk : kVerification;
  });
}

int cmd_converge(const Options& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    apply_jobs(opts);
    const RunSetup setup = resolve(load_run_config(opts.config));
    const fs::path dir = output_dir(opts, setup.config);
    const auto& cfg = setup.config;
    const auto& d = cfg.diagnostics;
    std::vector<LadderLevel> levels;
    auto mesh = setup.mesh;
    double dt = setup.dt;
    for (int j = 0; j < d.levels; ++j) {
      levels.push_back({mesh, dt});
      if (j + 1 < d.levels) {
        mesh = std::make_shared<const Mesh>(refine_by_bisection(*mesh));
        dt /= d.dt_exponent == 1 ? 2.0 : 4.0;
      }
    }
    if (cfg.scheme.mode == TimeMode::Explicit) {
      // CFL scales with h, so refining by two in space and time keeps it; dt ~ h^2 only tightens it
      for (const auto& lv : levels) {
        const NumericalFlux flux(cfg.scheme.flux, *setup.model);
        const double limit = cfl_limit(*setup.model, *lv.mesh, flux, cfg.scheme.solver);
        if (lv.dt > limit * (1.0 + 1e-12))
          throw Error(ErrorKind::Parameter, "ladder level with " + std::to_string(lv.mesh->num_cells()) +
                                                " cells violates the CFL limit");
      }
    }
    log << "converge: " << levels.size() << " levels from " << setup.mesh->num_cells() << " cells\n";
    const ConvergenceTable table = refinement_study(setup.model, cfg.scheme.flux, levels, d.norm, cfg.scheme.solver,
                                                    cfg.scheme.mode, d.comparison);
    std::vector<double> osc;
    for (std::size_t j = 0; j + 1 < table.solutions.size(); ++j)
      osc.push_back(oscillation_proxy(table.solutions[j], table.solutions[j + 1]));
    io::write_convergence_csv(dir / "convergence.csv", table, osc);
    Json rows = Json::array();
    for (std::size_t j = 0; j < table.rows.size(); ++j) {
      const auto& r = table.rows[j];
      rows.push_back({{"cells", r.cells}, {"h", r.h}, {"dt", r.dt},
                      {"difference", std::isnan(r.difference) ? Json(nullptr) : Json(r.difference)},
                      {"ratio", std::isnan(r.ratio) ? Json(nullptr) : Json(r.ratio)}});
      log << "  " << r.cells << " cells, dt " << num(r.dt) << ": e = " << num(r.difference)
          << (std::isnan(r.ratio) ? std::string() : ", ratio " + num(r.ratio)) << "\n";
    }
    const bool ok = table.strictly_decreasing();
    Json m = manifest("converge", setup);
    m["results"] = {{"rows", rows}, {"strictly_decreasing", ok}, {"oscillation_proxy", osc}};
    m["outputs"] = {"convergence.csv"};
    if (plots_wanted(opts, cfg)) {
      io::write_text(dir / "convergence.gp", io::ladder_plot_script("convergence.csv", setup.model->spec.name,
                                                                    "convergence.png"));
      m["outputs"].push_back("convergence.gp");
    }
    io::write_json(dir / "manifest.json", m);
    if (!ok) {
      err << "verification failed: Cauchy differences are not strictly decreasing\n";
      return kVerification;
    }
    return kOk;
  });
}

namespace {

// Fixed setup shared by the fig1a, fig1b and fig1c profiles.
constexpr double kFigDomainA = 0.0;
constexpr double kFigDomainB = 1.0;
constexpr int kFigCells = 200;
constexpr int kFigLadder[3] = {100, 200, 400};
constexpr double kFigCflSafety = 0.5;
constexpr double kFigSubA = 0.1;
constexpr double kFigSubB = 0.8;

struct FigJob {
  std::string model;
  int cells;
  DiscreteSolution solution;
};

// dt for the finest ladder level, with a step count divisible by 4 so that
// all levels share nested time grids
double fig_finest_dt(const Model& model) {
  const Mesh fine = build_interval_mesh(kFigDomainA, kFigDomainB, kFigLadder[2]);
  SolverConfig cfg;
  cfg.cfl_safety = kFigCflSafety;
  const NumericalFlux flux(FluxKind::Godunov, model);
  const double limit = cfl_limit(model, fine, flux, cfg);
  int n = static_cast<int>(std::ceil(model.T / limit * (1.0 - 1e-12)));
  n = (n + 3) / 4 * 4;
  return model.T / n;
}

}  // namespace

int cmd_reproduce_fig1(const Options& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    apply_jobs(opts);
    const fs::path dir = opts.out ? *opts.out : fs::path("fig1");
    io::ensure_directory(dir);
    std::map<std::string, std::shared_ptr<const Model>> models;
    std::map<std::string, double> finest_dt;
    for (const char* name : {"fig1a", "fig1b", "fig1c"}) {
      models[name] = std::make_shared<const Model>(make_model(builtin_model(name)));
      finest_dt[name] = fig_finest_dt(*models[name]);
    }
    std::vector<FigJob> jobs;
    for (const char* name : {"fig1a", "fig1b"})
      for (int n : kFigLadder) jobs.push_back({name, n, {}});
    jobs.push_back({"fig1c", kFigCells, {}});

    SolverConfig cfg;
    cfg.cfl_safety = kFigCflSafety;
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(jobs.size()); ++i) {
      try {
        auto& job = jobs[i];
        auto mesh = std::make_shared<const Mesh>(build_interval_mesh(kFigDomainA, kFigDomainB, job.cells));
        const double dt = finest_dt[job.model] * (kFigLadder[2] / job.cells);
        job.solution = run_evolution(models[job.model], mesh, dt, FluxKind::Godunov, cfg, TimeMode::Explicit);
      } catch (...) {
#pragma omp critical(fvdeg_fig1_error)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    auto find = [&](const std::string& model, int cells) -> const DiscreteSolution& {
      for (const auto& j : jobs)
        if (j.model == model && j.cells == cells) return j.solution;
      throw Error(ErrorKind::Parameter, "missing job");
    };
    Json m;
    m["command"] = "reproduce-fig1";
    m["setup"] = {{"domain", {kFigDomainA, kFigDomainB}},
                  {"u0", kDefaultInitialDatum},
                  {"cells", kFigCells},
                  {"ladder_cells", kFigLadder},
                  {"scheme", "explicit"},
                  {"flux", "godunov"},
                  {"cfl_safety", kFigCflSafety},
                  {"interior_subdomain", {kFigSubA, kFigSubB}}};
    m["models"] = Json::object();
    m["outputs"] = Json::array();
    for (const char* name : {"fig1a", "fig1b", "fig1c"}) {
      const auto& s = find(name, kFigCells);
      io::write_profile_csv(dir / (std::string(name) + ".csv"), *s.mesh, s.steps.back(), &s.steps.front());
      m["models"][name] = io::model_to_json(*models[name]);
      m["models"][name]["dt"] = s.dt;
      m["models"][name]["steps"] = s.num_steps();
      m["outputs"].push_back(std::string(name) + ".csv");
      log << name << ": T = " << num(s.T) << ", dt = " << num(s.dt) << ", final range [" << num(s.stats.back().min_value)
          << ", " << num(s.stats.back().max_value) << "]\n";
    }
    for (const char* name : {"fig1a", "fig1b"}) {
      std::vector<DiscreteSolution> ladder;
      for (int n : kFigLadder) ladder.push_back(find(name, n));
      const auto rep = boundary_layer_probe(ladder, kFigSubA, kFigSubB);
      const std::string file = std::string(name) + "_boundary_layer.csv";
      io::write_boundary_layer_csv(dir / file, rep);
      m["outputs"].push_back(file);
      m["boundary_layer"][name] = {{"boundary_max_increasing", rep.boundary_max_increasing()},
                                   {"interior_cauchy_decreasing", rep.interior_cauchy_decreasing()}};
      log << name << " boundary layer:\n";
      for (const auto& r : rep.rows)
        log << "  h = " << num(r.h) << ": boundary-cell max " << num(r.boundary_cell_max) << ", interior L1 "
            << num(r.interior_l1) << ", interior difference " << num(r.interior_difference) << "\n";
    }
    if (opts.emit_plots) {
      io::write_text(dir / "fig1.gp", io::profile_plot_script({"fig1a.csv", "fig1b.csv", "fig1c.csv"},
                                                              "final-time profiles", "fig1.png"));
      io::write_text(dir / "boundary_layer.gp",
                     "set datafile separator ','\nset terminal pngcairo size 900,600\nset output "
                     "'boundary_layer.png'\nset logscale x\nset xlabel 'h'\nset ylabel 'max u in boundary cells'\n"
                     "plot 'fig1a_boundary_layer.csv' using 1:2 skip 1 with linespoints title 'fig1a', "
                     "'fig1b_boundary_layer.csv' using 1:2 skip 1 with linespoints title 'fig1b'\n");
      m["outputs"].push_back("fig1.gp");
      m["outputs"].push_back("boundary_layer.gp");
    }
    io::write_json(dir / "manifest.json", m);
    return kOk;
  });
}

int main(int argc, char** argv) {
  CLI::App app{"Finite volume solver for u_t + div f(u) - lap phi(u) = 0 with zero-flux boundaries"};
  app.require_subcommand(1);
  Options opts;
  std::string out;
  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opts.config, "run configuration (JSON)");
    if (needs_config) c->required();
    sub->add_option("--out", out, "output directory");
    sub->add_flag("--emit-plots", opts.emit_plots, "write gnuplot scripts next to the CSVs");
    sub->add_option("--jobs", opts.jobs, "OpenMP threads (0: runtime default)");
  };
  auto* run = app.add_subcommand("run", "evolve a configuration");
  auto* stationary = app.add_subcommand("stationary", "solve the resolvent problem u + div f(u) - lap phi(u) = g");
  auto* verify = app.add_subcommand("verify", "entropy certificate of a run or trajectory file");
  auto* converge = app.add_subcommand("converge", "refinement ladder with Cauchy differences");
  auto* fig1 = app.add_subcommand("reproduce-fig1", "final-time profiles of the fig1 builtins and the boundary-layer ladder");
  for (auto* s : {run, stationary, verify, converge}) common(s, true);
  common(fig1, false);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }
  if (!out.empty()) opts.out = out;
  if (*run) return cmd_run(opts, std::cout, std::cerr);
  if (*stationary) return cmd_stationary(opts, std::cout, std::cerr);
  if (*verify) return cmd_verify(opts, std::cout, std::cerr);
  if (*converge) return cmd_converge(opts, std::cout, std::cerr);
  return cmd_reproduce_fig1(opts, std::cout, std::cerr);
}

}  // namespace fvdeg::cli
