// Acceptance suite: one line per criterion, "criterion N: PASS|FAIL <details>".
//
// Usage: acceptance [--strict] [--cache DIR] [N ...]
// Without numbers every criterion runs. The exit code is 0 once all selected
// criteria have been evaluated; with --strict any FAIL makes it 1.

#include "support/oracles.hpp"

#include "sdtm/adaptive.hpp"
#include "sdtm/driver.hpp"
#include "sdtm/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace sdtm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string cache_dir;

SolverConfig advection_base() {
  SolverConfig c;
  c.problem = "advection1d";
  c.scheme = "rk4";
  c.dt = 1e-3;
  c.T = 1.0;
  c.error_every = 1000000;
  return c;
}

SolverConfig burgers_base(double T) {
  SolverConfig c;
  c.problem = "burgers1d";
  c.scheme = "exbdf4";
  c.beta = 2.0;
  c.dt = 1e-3;
  c.T = T;
  c.network.hidden = {400};
  c.network.fourier = FourierMode::Custom;
  c.network.multipliers = IntMatrix(2, 1);
  c.network.multipliers << 1, 2;
  c.sampling.counts = {4097};
  c.error_every = 1000000;
  c.reference.cache_dir = cache_dir;
  return c;
}

// Fit residual of the row closest to time t.
double residual_at(const std::vector<RunRow>& rows, double t) {
  const RunRow* best = &rows.front();
  for (const auto& r : rows)
    if (std::abs(r.t - t) < std::abs(best->t - t)) best = &r;
  return best->fit_residual;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  SolverConfig base = advection_base();
  base.network.hidden = {200};
  base.network.r = 4.0;
  base.sampling.counts = {401};
  const std::vector<std::string> schemes{"euler", "rk2", "bdf2", "rk4", "bdf4"};
  const ConvergenceResult res = convergence_study(base, schemes, {4e-3, 2e-3, 1e-3, 5e-4});
  const std::map<std::string, std::pair<double, double>> want{
      {"euler", {1.0, 0.2}}, {"rk2", {2.0, 0.3}}, {"bdf2", {2.0, 0.3}}, {"rk4", {4.0, 0.5}}, {"bdf4", {4.0, 0.5}}};
  bool ok = true;
  std::string d;
  for (const auto& s : res.slopes) {
    const auto [target, tol] = want.at(s.scheme);
    const bool good = s.slope && std::abs(*s.slope - target) <= tol;
    ok = ok && good;
    d += fmt("%s=%.2f ", s.scheme.c_str(), s.slope ? *s.slope : NAN);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs <= 300;
  return {ok, d + fmt("(%.0f s, limit 300 s)", secs)};
}

SolverConfig advection_msrnb(double T) {
  SolverConfig c = advection_base();
  c.T = T;
  c.network.hidden = {100};
  c.network.scale_n_max = 10;
  return c;
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const RunRecord r = run(advection_msrnb(1.0));
  const double secs = seconds_since(t0);
  return {r.final_rel_l2 <= 1e-6 && secs <= 120, fmt("rel_l2=%.3e (limit 1e-6), %.0f s (limit 120 s)", r.final_rel_l2, secs)};
}

Outcome criterion3() {
  SolverConfig hard = advection_msrnb(2.0);
  hard.error_every = 2000;
  SolverConfig soft = hard;
  soft.overrides.boundary = BoundaryKind::PeriodicSoft;
  const RunRecord rh = run(hard), rs = run(soft);
  const bool ratio_ok = rs.final_rel_l2 >= 10 * rh.final_rel_l2;

  // Growth over the last half: means over four consecutive windows must not decrease.
  const auto& rows = rs.rows;
  const size_t half = rows.size() / 2, len = (rows.size() - half) / 4;
  std::vector<double> means;
  for (int w = 0; w < 4; ++w) {
    double acc = 0.0;
    for (size_t i = half + w * len; i < half + (w + 1) * len; ++i) acc += rows[i].fit_residual;
    means.push_back(acc / len);
  }
  const bool growing = std::is_sorted(means.begin(), means.end());
  return {ratio_ok && growing, fmt("hard=%.3e soft=%.3e ratio=%.1f (need >= 10); soft residual window means %.2e %.2e %.2e %.2e (%s)",
                                   rh.final_rel_l2, rs.final_rel_l2, rs.final_rel_l2 / rh.final_rel_l2, means[0], means[1],
                                   means[2], means[3], growing ? "nondecreasing" : "not monotone")};
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  const RunRecord fixed = run(burgers_base(0.6));
  const double f1 = residual_at(fixed.rows, 0.1), f5 = residual_at(fixed.rows, 0.5);
  const bool degrade_ok = f5 >= 100 * f1;

  SolverConfig ac = burgers_base(0.6);
  AdaptivePolicy policy;
  policy.epsilon = 1e-4;
  policy.r_max = 100;
  ac.adaptive = policy;
  Solver s(ac);
  s.initialize();
  std::string diverged;
  try {
    while (s.step_index() < ac.step_count()) s.step();
  } catch (const DivergenceError& e) {
    diverged = fmt(", adaptive run diverged at step %ld", e.step());
  }
  const auto& rows = s.record().rows;
  const double a1 = residual_at(rows, 0.1);
  double worst = 0.0, first_reinit = NAN;
  bool reached = false;
  for (const auto& r : rows) {
    if (r.t >= 0.1 - 1e-12 && r.t <= 0.5 + 1e-12) worst = std::max(worst, r.fit_residual);
    if (r.t >= 0.5 - 1e-12) reached = true;
    if (r.reinit && r.t >= 0.3 - 1e-12 && r.t <= 0.5 + 1e-12 && std::isnan(first_reinit)) first_reinit = r.t;
  }
  const bool flat_ok = reached && worst <= 10 * a1;
  const bool reinit_ok = !std::isnan(first_reinit);
  const double secs = seconds_since(t0);
  const bool ok = degrade_ok && flat_ok && reinit_ok && secs <= 600;
  return {ok, fmt("fixed r=1: res(0.1)=%.2e res(0.5)=%.2e x%.0f (need >= 100), rel_l2(0.6)=%.2e; adaptive: res(0.1)=%.2e max on "
                  "[0.1,0.5]=%.2e (need <= %.2e)%s, first reinit in [0.3,0.5] at t=%.3f; %.0f s (limit 600 s)",
                  f1, f5, f5 / f1, fixed.final_rel_l2, a1, worst, 10 * a1, diverged.c_str(), first_reinit, secs)};
}

Outcome criterion5() {
  const std::vector<int> widths{25, 50, 100, 200, 400};
  const auto rows = width_sweep(advection_base(), widths);
  bool decreasing = true;
  std::string d;
  for (size_t i = 0; i < rows.size(); ++i) {
    d += fmt("w%d=%.2e ", rows[i].width, rows[i].rel_l2);
    if (i > 0 && !(rows[i].rel_l2 < rows[i - 1].rel_l2)) decreasing = false;
  }
  const double last_ratio = rows[3].rel_l2 / rows[4].rel_l2;
  const bool plateau = last_ratio < 2.0 && last_ratio > 0.5;
  return {decreasing && plateau, d + fmt("%s; last two differ by %.2fx (need < 2)", decreasing ? "decreasing" : "not decreasing",
                                         std::max(last_ratio, 1 / last_ratio))};
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  const double eps = 1e-8;
  int prev = 0;
  bool monotone = true, grid_stable = true;
  double worst = 0.0, at50 = 0.0;
  for (int k = 1; k <= 50; ++k) {
    const int s = frequency_support_at(k, eps, 4096);
    if (frequency_support_at(k, eps, 8192) != s) grid_stable = false;
    if (s < prev) monotone = false;
    prev = s;
    worst = std::max(worst, static_cast<double>(s) / k);
    if (k == 50) at50 = static_cast<double>(s) / k;
  }
  const double secs = seconds_since(t0);
  const bool ok = monotone && grid_stable && worst <= 1.5 * at50 && secs <= 60;
  return {ok, fmt("S_50=%d, max S_k/k=%.3f vs 1.5*S_50/50=%.3f, %s, %s, %.1f s (limit 60 s)", prev, worst, 1.5 * at50,
                  monotone ? "nondecreasing" : "not monotone", grid_stable ? "grid doubling stable" : "grid doubling changes S_k",
                  secs)};
}

Outcome criterion7() {
  auto config = [](double r) {
    SolverConfig c;
    c.problem = "ac1d-wave";
    c.scheme = "exbdf4";
    c.beta = 2.0;
    c.dt = 1e-3;
    c.T = 1.0;
    c.network.hidden = {500};
    c.network.r = r;
    c.sampling.counts = {4097};
    c.error_every = 1000000;
    return c;
  };
  const RunRecord r50 = run(config(50)), r10 = run(config(10));
  const bool ok = r50.final_rel_l2 <= 1e-4 && r50.final_rel_l2 * 10 <= r10.final_rel_l2;
  return {ok, fmt("r=50 rel_l2=%.3e (limit 1e-4), r=10 rel_l2=%.3e, ratio %.0f (need >= 10)", r50.final_rel_l2, r10.final_rel_l2,
                  r10.final_rel_l2 / r50.final_rel_l2)};
}

// Sign changes around a closed periodic line.
int cyclic_sign_changes(const Matrix& v) {
  int c = 0;
  for (long i = 0; i < v.rows(); ++i)
    if ((v(i, 0) > 0) != (v((i + 1) % v.rows(), 0) > 0)) ++c;
  return c;
}

Outcome criterion8() {
  const Matrix grid = uniform_grid(Domain({-1, -1}, {1, 1}), std::vector<int>{65, 65});
  const Vector line = periodic_axis(-1, 1, 256);
  // Lines through the centres of the initial sign domains; x = 0 and y = 0 are nodal lines.
  Matrix across_x(256, 2), across_y(256, 2);
  across_x.col(0).setConstant(0.5);
  across_x.col(1) = line;
  across_y.col(0) = line;
  across_y.col(1).setConstant(0.5);

  std::vector<Matrix> finals;
  std::string d;
  bool domains_ok = true;
  for (const char* scheme : {"euler", "rk2"})
    for (double dt : {1e-2, 5e-3}) {
      SolverConfig c;
      c.problem = "ac2d";
      c.scheme = scheme;
      c.dt = dt;
      c.T = 4.0;
      c.network.hidden = {400};
      c.sampling.kind = "lhs";
      c.error_every = 1000000;
      Solver s(c);
      s.run();
      finals.push_back(s.predict(grid));
      const int cx = cyclic_sign_changes(s.predict(across_x)), cy = cyclic_sign_changes(s.predict(across_y));
      domains_ok = domains_ok && cx == 2 && cy == 2;
      d += fmt("%s dt=%g sign changes %d/%d; ", scheme, dt, cx, cy);
    }
  double worst = 0.0;
  for (size_t i = 0; i < finals.size(); ++i)
    for (size_t j = i + 1; j < finals.size(); ++j) worst = std::max(worst, (finals[i] - finals[j]).cwiseAbs().maxCoeff());
  return {domains_ok && worst <= 1e-2, d + fmt("max pairwise linf %.2e (limit 1e-2)", worst)};
}

Outcome criterion9() {
  SolverConfig c;
  c.problem = "ns2d";
  c.scheme = "exbdf2";
  c.dt = 1e-3;
  c.T = 0.1;
  c.network.hidden = {200};
  c.error_every = 1000000;
  const RunRecord r = run(c);
  const double u1 = r.final_component_rel_l2.at(0), u2 = r.final_component_rel_l2.at(1);
  bool two_solves = true;
  for (const auto& row : r.rows)
    if (row.step >= 2 && row.solves != 2) two_solves = false;
  const double mom = oracle::ns_momentum_residual(64, 0.3), div = oracle::ns_divergence(64, 0.3),
               poi = oracle::ns_poisson_defect(64, 1.0);
  const bool ok = u1 <= 1e-2 && u2 <= 1e-2 && two_solves && mom <= 1e-8 && div <= 1e-8 && poi <= 1e-8;
  return {ok, fmt("rel_l2 u1=%.2e u2=%.2e (limit 1e-2), %s, oracles momentum %.1e divergence %.1e Poisson %.1e (limit 1e-8)",
                  u1, u2, two_solves ? "2 solves per step after bootstrap" : "solve count differs from 2", mom, div, poi)};
}

Outcome criterion10() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> uni(-1, 1);
  std::normal_distribution<double> g;

  IntMatrix b(2, 1);
  b << 1, 2;
  const int w[] = {1, 4, 80, 1};
  const RnbModel model = init_rnb(w, 3.0, FourierFeatureMap{b, {2.0}}, make_msrnb_scales(80, 4), 3);
  Matrix pts(40, 1);
  for (long i = 0; i < pts.rows(); ++i) pts(i, 0) = uni(rng);
  const double deriv = oracle::basis_derivative_error(model, pts);

  Matrix A(60, 12), rhs(60, 1);
  for (long i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
  for (long i = 0; i < rhs.size(); ++i) rhs.data()[i] = g(rng);
  const LsqSystem sys = assemble_design(A, Matrix(0, 12), 0.0, 0.0);
  const Matrix theta = solve_coefficients(factorize(sys), stack_rhs(sys, rhs, Matrix()));
  const Matrix ref = oracle::normal_equations(A, rhs);
  const double lsq = (theta - ref).norm() / ref.norm();

  Vector x(300);
  for (auto& v : x) v = g(rng);
  const double parseval = oracle::parseval_defect(x);
  const double self = oracle::burgers_self_convergence(4096, 1e-4);

  const bool ok = deriv <= 1e-6 && lsq <= 1e-8 && parseval <= 1e-10 && self <= 1e-8;
  return {ok, fmt("derivatives %.1e (1e-6), lsq %.1e (1e-8), Parseval %.1e (1e-10), spectral self-convergence %.1e (1e-8)", deriv,
                  lsq, parseval, self)};
}

Outcome criterion11() {
  // Timing runs skip the reference so only the solver is measured.
  auto config = [](const std::string& scheme, bool reinit) {
    SolverConfig c = burgers_base(0.6);
    c.scheme = scheme;
    c.reinit_every_step = reinit;
    c.reference.source = ReferenceSource::None;
    return c;
  };
  const RunRecord cached = run(config("exbdf4", false));
  const RunRecord reinit = run(config("exbdf4", true));
  const RunRecord rk4 = run(config("rk4", false));
  const double a = reinit.total_ms / cached.total_ms, b = rk4.total_ms / cached.total_ms;
  return {a >= 3 && b >= 2, fmt("cached %.0f ms, per-step reinit %.0f ms (x%.1f, need >= 3), RK4 %.0f ms (x%.1f, need >= 2)",
                                cached.total_ms, reinit.total_ms, a, rk4.total_ms, b)};
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--strict")) {
      strict = true;
    } else if (!std::strcmp(argv[i], "--cache") && i + 1 < argc) {
      cache_dir = argv[++i];
    } else {
      const int n = std::atoi(argv[i]);
      if (n < 1 || n > 11) {
        std::fprintf(stderr, "usage: acceptance [--strict] [--cache DIR] [1-11 ...]\n");
        return 1;
      }
      selected.insert(n);
    }
  }
  if (cache_dir.empty()) cache_dir = (std::filesystem::temp_directory_path() / "sdtm_acceptance_cache").string();

  // Oracles first: criterion 10 runs before everything else.
  const std::vector<std::pair<int, std::function<Outcome()>>> order{
      {10, criterion10}, {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6},   {7, criterion7}, {8, criterion8}, {9, criterion9}, {11, criterion11}};
  int failed = 0;
  for (const auto& [n, fn] : order) {
    if (!selected.empty() && !selected.count(n)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %d: %s %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return strict && failed > 0 ? 1 : 0;
}
