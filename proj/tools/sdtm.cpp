// sdtm: command-line front end for solver runs and parameter sweeps.
//
// Exit codes: 0 success, 1 configuration or input error, 2 numerical failure
// (divergence or a failed initial fit).

#include "sdtm/config.hpp"
#include "sdtm/csv.hpp"
#include "sdtm/spectral_ref.hpp"
#include "sdtm/studies.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sdtm;

namespace {

struct Common {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

// Base solver config from --config (or defaults), with --seed applied.
RunConfigFile base_config(const Common& o) {
  RunConfigFile f;
  if (!o.config.empty()) f = load_run_config(o.config);
  if (o.seed) f.solver.seed = *o.seed;
  if (!o.out_dir.empty()) f.out_dir = o.out_dir;
  if (f.out_dir.empty()) f.out_dir = "out";
  return f;
}

std::string csv_text(const std::function<void(std::ostream&)>& fill) {
  std::ostringstream s;
  fill(s);
  return s.str();
}

json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_metadata(const fs::path& dir, const json& meta) { write_text_file(dir / "metadata.json", meta.dump(2) + "\n"); }

std::string snapshot_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_t%.6g.csv", t);
  return buf;
}

int cmd_solve(const Common& o) {
  const RunConfigFile f = base_config(o);
  const SolverConfig cfg = resolve_config(f.solver);
  cfg.validate();
  const fs::path dir = f.out_dir;
  json resolved = to_json(cfg);
  resolved["out_dir"] = f.out_dir;
  write_text_file(dir / "config.resolved.json", resolved.dump(2) + "\n");

  Solver solver(cfg);
  json meta{{"command", "solve"}, {"config", resolved}};
  int rc = 0;
  try {
    solver.initialize();
    const long steps = cfg.step_count();
    while (solver.step_index() < steps) solver.step();
  } catch (const DivergenceError& e) {
    meta["diverged_at_step"] = e.step();
    meta["error"] = e.what();
    std::fprintf(stderr, "diverged: %s\n", e.what());
    rc = 2;
  } catch (const InitFailureError& e) {
    meta["error"] = e.what();
    std::fprintf(stderr, "initial fit failed: %s\n", e.what());
    rc = 2;
  }
  const RunRecord& rec = solver.record();
  write_text_file(dir / "run.csv", csv_text([&](std::ostream& s) { write_run_csv(s, rec); }));
  for (const Snapshot& snap : rec.snapshots)
    write_text_file(dir / snapshot_name(snap.t),
                    csv_text([&](std::ostream& s) { write_snapshot_csv(s, snap, rec.components); }));

  meta["steps"] = rec.rows.empty() ? 0 : rec.rows.back().step;
  meta["final_rel_l2"] = nan_to_null(rec.final_rel_l2);
  meta["final_linf"] = nan_to_null(rec.final_linf);
  if (rec.components.size() > 1) {
    json comps = json::object();
    for (size_t i = 0; i < rec.components.size() && i < rec.final_component_rel_l2.size(); ++i)
      comps[rec.components[i]] = nan_to_null(rec.final_component_rel_l2[i]);
    meta["final_component_rel_l2"] = comps;
  }
  meta["total_ms"] = rec.total_ms;
  meta["reinit_count"] = rec.reinit_count;
  meta["factorizations"] = rec.factorizations;
  meta["solves"] = rec.solves;
  write_metadata(dir, meta);
  if (rc == 0) std::printf("final rel_l2 %s\n", format_double(rec.final_rel_l2).c_str());
  return rc;
}

int cmd_convergence(const Common& o, const std::vector<std::string>& schemes, const std::vector<double>& dts) {
  const RunConfigFile f = base_config(o);
  const SolverConfig base = resolve_config(f.solver);
  const ConvergenceResult res = convergence_study(base, schemes, dts, o.threads);
  const fs::path dir = f.out_dir;
  write_text_file(dir / "convergence.csv", csv_text([&](std::ostream& s) {
                    CsvWriter w(s);
                    w.row({"scheme", "dt", "rel_l2", "diverged", "wall_ms", "slope"});
                    for (const auto& r : res.rows) {
                      std::string slope;
                      for (const auto& sl : res.slopes)
                        if (sl.scheme == r.scheme && sl.slope) slope = format_double(*sl.slope);
                      w.row({r.scheme, format_double(r.dt), format_double(r.rel_l2), r.diverged ? "1" : "0",
                             format_double(r.total_ms), slope});
                    }
                  }));
  json slopes = json::object();
  for (const auto& sl : res.slopes) {
    slopes[sl.scheme] = sl.slope ? json(*sl.slope) : json(nullptr);
    std::printf("%s slope %s\n", sl.scheme.c_str(), sl.slope ? format_double(*sl.slope).c_str() : "-");
  }
  write_metadata(dir, {{"command", "convergence"}, {"config", to_json(base)}, {"schemes", schemes}, {"dts", dts},
                       {"slopes", slopes}});
  return 0;
}

int cmd_widths(const Common& o, const std::vector<int>& widths) {
  const RunConfigFile f = base_config(o);
  const SolverConfig base = resolve_config(f.solver);
  const auto rows = width_sweep(base, widths, o.threads);
  const fs::path dir = f.out_dir;
  write_text_file(dir / "widths.csv", csv_text([&](std::ostream& s) {
                    CsvWriter w(s);
                    w.row({"width", "rel_l2", "diverged", "wall_ms"});
                    for (const auto& r : rows)
                      w.row({std::to_string(r.width), format_double(r.rel_l2), r.diverged ? "1" : "0",
                             format_double(r.total_ms)});
                  }));
  for (const auto& r : rows) std::printf("width %d rel_l2 %s\n", r.width, format_double(r.rel_l2).c_str());
  write_metadata(dir, {{"command", "widths"}, {"config", to_json(base)}, {"widths", widths}});
  return 0;
}

int cmd_fit(const Common& o, FitStudyConfig fc, const std::vector<int>& multipliers) {
  if (o.seed) fc.seed = *o.seed;
  if (!multipliers.empty()) {
    fc.multipliers.resize(static_cast<long>(multipliers.size()), 1);
    for (size_t i = 0; i < multipliers.size(); ++i) fc.multipliers(static_cast<long>(i), 0) = multipliers[i];
  }
  const fs::path dir = o.out_dir.empty() ? "out" : o.out_dir;
  const auto rows = fit_study(fc, o.threads);
  write_text_file(dir / "fit.csv", csv_text([&](std::ostream& s) {
                    CsvWriter w(s);
                    w.row({"target", "r", "seed", "mse"});
                    for (const auto& r : rows)
                      for (size_t i = 0; i < r.mse.size(); ++i)
                        w.row({r.target, format_double(r.r), std::to_string(fc.seed + i), format_double(r.mse[i])});
                  }));
  write_text_file(dir / "fit_summary.csv", csv_text([&](std::ostream& s) {
                    CsvWriter w(s);
                    w.row({"target", "r", "mean_mse", "std_mse"});
                    for (const auto& r : rows)
                      w.row({r.target, format_double(r.r), format_double(r.mean), format_double(r.stddev)});
                  }));
  for (const auto& r : rows)
    std::printf("%s r=%s mean %s std %s\n", r.target.c_str(), format_double(r.r).c_str(), format_double(r.mean).c_str(),
                format_double(r.stddev).c_str());
  std::vector<int> mult;
  for (long i = 0; i < fc.multipliers.rows(); ++i) mult.push_back(fc.multipliers(i, 0));
  write_metadata(dir, {{"command", "fit"},
                       {"targets", fc.targets},
                       {"r", fc.r_values},
                       {"width", fc.width},
                       {"seeds", fc.seeds},
                       {"seed", fc.seed},
                       {"points", fc.points},
                       {"multipliers", mult.empty() ? std::vector<int>{1} : mult},
                       {"lambda", fc.lambda},
                       {"spectral_n", fc.spectral_n},
                       {"spectral_dt", fc.spectral_dt}});
  return 0;
}

int cmd_support(const Common& o, const std::vector<double>& ks, double epsilon, int grid_n) {
  const fs::path dir = o.out_dir.empty() ? "out" : o.out_dir;
  const auto rows = support_study(ks, epsilon, grid_n);
  write_text_file(dir / "support.csv", csv_text([&](std::ostream& s) {
                    CsvWriter w(s);
                    w.row({"k", "S_k", "S_k_over_k"});
                    for (const auto& r : rows) w.row({format_double(r.k), std::to_string(r.support), format_double(r.ratio)});
                  }));
  double worst = 0.0;
  for (const auto& r : rows)
    if (std::isfinite(r.ratio)) worst = std::max(worst, r.ratio);
  std::printf("max S_k/k %s\n", format_double(worst).c_str());
  write_metadata(dir, {{"command", "support"}, {"k", ks}, {"epsilon", epsilon}, {"grid_n", grid_n},
                       {"max_ratio", worst}});
  return 0;
}

int cmd_reference(const Common& o, const std::vector<double>& times) {
  const RunConfigFile f = base_config(o);
  const SolverConfig cfg = resolve_config(f.solver);
  const PdeProblem p = make_problem(cfg.problem, cfg.overrides);
  if (!p.has_spectral_reference) throw ConfigError("problem", "no spectral reference for " + p.name);
  std::vector<double> ts = times.empty() ? std::vector<double>{cfg.T} : times;
  const fs::path dir = f.out_dir;
  const auto snaps = reference_snapshots(dir, p, cfg.reference.spectral_n, cfg.reference.spectral_dt, ts);
  for (const auto& s : snaps)
    std::printf("%s\n", (dir / (reference_cache_stem(p, cfg.reference.spectral_n, cfg.reference.spectral_dt, s.t) + ".csv"))
                            .string()
                            .c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random neural basis time marching for evolution PDEs"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", common.config, "JSON run configuration");
    sub->add_option("--out-dir", common.out_dir, "output directory (default: config out_dir, else ./out)");
    sub->add_option("--seed", common.seed, "override the base seed");
    sub->add_option("--threads", common.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  };

  auto* solve = app.add_subcommand("solve", "run one configuration");
  add_common(solve, true);
  solve->get_option("--config")->required();

  std::vector<std::string> schemes{"euler", "rk2", "rk4"};
  std::vector<double> dts{4e-3, 2e-3, 1e-3, 5e-4};
  auto* conv = app.add_subcommand("convergence", "final error over dt for several schemes");
  add_common(conv, true);
  conv->add_option("--schemes", schemes, "comma separated scheme names")->delimiter(',');
  conv->add_option("--dts", dts, "comma separated step sizes")->delimiter(',');

  std::vector<int> widths{25, 50, 100, 200, 400};
  auto* wid = app.add_subcommand("widths", "final error over hidden width");
  add_common(wid, true);
  wid->add_option("--widths", widths, "comma separated widths")->delimiter(',');

  FitStudyConfig fit_cfg;
  std::vector<int> multipliers;
  std::string cache;
  auto* fit = app.add_subcommand("fit", "supervised least-squares fits over r and seeds");
  add_common(fit, false);
  fit->add_option("--targets", fit_cfg.targets, "sin and/or burgers@<t>")->delimiter(',');
  fit->add_option("--r", fit_cfg.r_values, "initialization coefficients")->delimiter(',');
  fit->add_option("--width", fit_cfg.width, "hidden width");
  fit->add_option("--seeds", fit_cfg.seeds, "seeds per (target, r)");
  fit->add_option("--points", fit_cfg.points, "training points on [-1, 1)");
  fit->add_option("--multipliers", multipliers, "Fourier multipliers")->delimiter(',');
  fit->add_option("--cache", cache, "spectral snapshot cache directory");

  std::vector<double> ks;
  double epsilon = 1e-8;
  int grid_n = 4096;
  auto* sup = app.add_subcommand("support", "frequency support of tanh(k sin x)");
  add_common(sup, false);
  sup->add_option("--k", ks, "values of k")->delimiter(',')->required();
  sup->add_option("--epsilon", epsilon, "magnitude threshold");
  sup->add_option("--grid", grid_n, "DFT size (checked against twice this)");

  std::vector<double> times;
  auto* ref = app.add_subcommand("reference", "generate cached spectral reference snapshots");
  add_common(ref, true);
  ref->get_option("--config")->required();
  ref->add_option("--times", times, "snapshot times (default T)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*solve) return cmd_solve(common);
    if (*conv) return cmd_convergence(common, schemes, dts);
    if (*wid) return cmd_widths(common, widths);
    if (*fit) {
      fit_cfg.reference_cache = cache;
      return cmd_fit(common, fit_cfg, multipliers);
    }
    if (*sup) return cmd_support(common, ks, epsilon, grid_n);
    if (*ref) return cmd_reference(common, times);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "diverged: %s\n", e.what());
    return 2;
  } catch (const InitFailureError& e) {
    std::fprintf(stderr, "initial fit failed: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
