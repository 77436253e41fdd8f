#include "sdtm/spectral_ref.hpp"

#include "fft.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sdtm {

namespace {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

bool power_of_two(int n) { return n >= 2 && (n & (n - 1)) == 0; }

struct Stepper {
  const PdeProblem& problem;
  detail::RealFft fft;
  int n;
  std::vector<double> k;       // angular wavenumbers per mode
  std::vector<cplx> ik;        // first derivative symbol (Nyquist zeroed)
  std::vector<double> dealias;
  std::vector<cplx> linear;
  std::vector<double> work;
  CVec scratch;

  Stepper(const PdeProblem& p, int n_) : problem(p), fft(n_), n(n_) {
    const int m = fft.modes();
    const double L = p.domain.extent(0);
    k.resize(m);
    ik.resize(m);
    dealias.resize(m);
    linear.resize(m);
    for (int j = 0; j < m; ++j) {
      k[j] = 2.0 * M_PI * j / L;
      ik[j] = (j == n / 2) ? cplx(0.0) : cplx(0.0, k[j]);
      dealias[j] = (3 * j <= n) ? 1.0 : 0.0;
      const double k2 = k[j] * k[j];
      switch (p.op) {
        case OperatorKind::Zero: linear[j] = 0.0; break;
        case OperatorKind::Advection: linear[j] = -p.params.speed * ik[j]; break;
        case OperatorKind::Heat:
        case OperatorKind::Burgers: linear[j] = -p.params.nu * k2; break;
        case OperatorKind::AllenCahn:
          linear[j] = -p.params.epsilon * p.params.epsilon * k2 + p.params.reaction;
          break;
        default: throw UnsupportedError("spectral_solve: operator not supported");
      }
    }
    work.resize(n);
    scratch.resize(m);
  }

  bool has_nonlinear() const { return problem.op == OperatorKind::Burgers || problem.op == OperatorKind::AllenCahn; }

  // Nonlinear part in modal space, dealiased.
  void nonlinear(const CVec& v, CVec& out) {
    const int m = fft.modes();
    if (!has_nonlinear()) {
      std::fill(out.begin(), out.end(), cplx(0.0));
      return;
    }
    fft.inverse(v.data(), work.data());
    if (problem.op == OperatorKind::Burgers) {
      for (double& w : work) w = w * w;
      fft.forward(work.data(), out.data());
      for (int j = 0; j < m; ++j) out[j] *= -0.5 * ik[j] * dealias[j];
    } else {
      const double a = problem.params.reaction;
      for (double& w : work) w = -a * w * w * w;
      fft.forward(work.data(), out.data());
      for (int j = 0; j < m; ++j) out[j] *= dealias[j];
    }
  }

  double factor_dt = -1.0;
  CVec E, E2;

  void rk4(CVec& v, double dt) {
    const int m = fft.modes();
    if (dt != factor_dt) {
      E.resize(m);
      E2.resize(m);
      for (int j = 0; j < m; ++j) {
        E[j] = std::exp(linear[j] * (dt / 2));
        E2[j] = E[j] * E[j];
      }
      factor_dt = dt;
    }
    CVec Nv(m), a(m), Na(m), b(m), Nb(m), c(m), Nc(m);
    nonlinear(v, Nv);
    for (int j = 0; j < m; ++j) a[j] = E[j] * (v[j] + dt / 2 * Nv[j]);
    nonlinear(a, Na);
    for (int j = 0; j < m; ++j) b[j] = E[j] * v[j] + dt / 2 * Na[j];
    nonlinear(b, Nb);
    for (int j = 0; j < m; ++j) c[j] = E2[j] * v[j] + dt * E[j] * Nb[j];
    nonlinear(c, Nc);
    for (int j = 0; j < m; ++j)
      v[j] = E2[j] * v[j] + dt / 6 * (E2[j] * Nv[j] + 2.0 * E[j] * (Na[j] + Nb[j]) + Nc[j]);
  }
};

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

nlohmann::json sidecar(const PdeProblem& p, int n, double dt, double t) {
  return {{"problem", p.name},          {"n", n},
          {"dt", dt},                   {"t", t},
          {"nu", p.params.nu},          {"epsilon", p.params.epsilon},
          {"reaction", p.params.reaction}, {"speed", p.params.speed}};
}

}  // namespace

std::vector<SpectralSnapshot> spectral_solve(const PdeProblem& problem, int n, double dt, double T,
                                             const std::vector<double>& snapshot_times) {
  if (problem.domain.dim() != 1) throw UnsupportedError("spectral_solve: 1D problems only");
  if (problem.boundary != BoundaryKind::PeriodicHard && problem.boundary != BoundaryKind::PeriodicSoft)
    throw UnsupportedError("spectral_solve: periodic problems only");
  if (!power_of_two(n)) throw std::invalid_argument("spectral_solve: n must be a power of two");
  if (!(dt > 0) || !(T >= 0)) throw std::invalid_argument("spectral_solve: need dt > 0 and T >= 0");
  if (!problem.initial) throw std::invalid_argument("spectral_solve: problem has no initial data");

  std::vector<std::pair<long, double>> wanted;
  for (double ts : snapshot_times) {
    if (ts < 0 || ts > T + 1e-12) throw std::invalid_argument("spectral_solve: snapshot time outside [0, T]");
    const double steps = ts / dt;
    const long s = std::lround(steps);
    if (std::abs(steps - s) > 1e-6) throw std::invalid_argument("spectral_solve: snapshot time not a multiple of dt");
    wanted.emplace_back(s, ts);
  }
  std::sort(wanted.begin(), wanted.end());

  Stepper st(problem, n);
  const Vector x = periodic_axis(problem.domain.lo(0), problem.domain.hi(0), n);
  Matrix x_pts = x;
  const Vector u0 = problem.initial(x_pts, 0.0).col(0);
  CVec v(st.fft.modes());
  st.fft.forward(u0.data(), v.data());

  std::vector<SpectralSnapshot> out;
  std::size_t next = 0;
  long step = 0;
  auto emit = [&]() {
    while (next < wanted.size() && wanted[next].first == step) {
      SpectralSnapshot s;
      s.t = wanted[next].second;
      s.x = x;
      s.u.resize(n);
      st.fft.inverse(v.data(), s.u.data());
      if (!s.u.allFinite()) throw DivergenceError(step, "spectral reference blew up");
      out.push_back(std::move(s));
      ++next;
    }
  };
  emit();
  const long last = wanted.empty() ? 0 : wanted.back().first;
  while (step < last) {
    st.rk4(v, dt);
    ++step;
    emit();
  }
  return out;
}

Vector spectral_interpolate(const Vector& u, double lo, double hi, const Vector& x) {
  const int n = static_cast<int>(u.size());
  detail::RealFft fft(n);
  CVec c(fft.modes());
  fft.forward(u.data(), c.data());
  const double w = 2.0 * M_PI / (hi - lo);
  Vector out(x.size());
  for (long i = 0; i < x.size(); ++i) {
    const double s = w * (x[i] - lo);
    double acc = c[0].real();
    for (int j = 1; j < fft.modes(); ++j) {
      const double scale = (2 * j == n) ? 1.0 : 2.0;
      acc += scale * (c[j].real() * std::cos(j * s) - c[j].imag() * std::sin(j * s));
    }
    out[i] = acc / n;
  }
  return out;
}

std::string reference_cache_stem(const PdeProblem& problem, int n, double dt, double t) {
  return problem.name + "_n" + std::to_string(n) + "_dt" + fmt_short(dt) + "_t" + fmt_short(t);
}

void save_reference(const std::filesystem::path& dir, const PdeProblem& problem, int n, double dt,
                    const SpectralSnapshot& snap) {
  std::filesystem::create_directories(dir);
  const std::string stem = reference_cache_stem(problem, n, dt, snap.t);
  std::ofstream csv(dir / (stem + ".csv"));
  csv << "x,u\n";
  for (long i = 0; i < snap.x.size(); ++i) csv << fmt_g(snap.x[i]) << ',' << fmt_g(snap.u[i]) << '\n';
  std::ofstream meta(dir / (stem + ".json"));
  meta << sidecar(problem, n, dt, snap.t).dump(2) << '\n';
  if (!csv || !meta) throw std::runtime_error("failed to write reference cache in " + dir.string());
}

bool load_reference(const std::filesystem::path& dir, const PdeProblem& problem, int n, double dt, double t,
                    SpectralSnapshot& snap) {
  const std::string stem = reference_cache_stem(problem, n, dt, t);
  std::ifstream meta(dir / (stem + ".json"));
  std::ifstream csv(dir / (stem + ".csv"));
  if (!meta || !csv) return false;
  nlohmann::json j;
  try {
    meta >> j;
  } catch (const nlohmann::json::exception&) {
    return false;
  }
  if (j != sidecar(problem, n, dt, t)) return false;
  std::string line;
  std::getline(csv, line);
  if (line != "x,u") return false;
  std::vector<double> xs, us;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) return false;
    xs.push_back(std::strtod(line.c_str(), nullptr));
    us.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
  }
  if (static_cast<int>(xs.size()) != n) return false;
  snap.t = t;
  snap.x = Eigen::Map<Vector>(xs.data(), n);
  snap.u = Eigen::Map<Vector>(us.data(), n);
  return true;
}

SpectralSnapshot reference_snapshot(const std::filesystem::path& dir, const PdeProblem& problem, int n, double dt,
                                    double t) {
  SpectralSnapshot snap;
  if (load_reference(dir, problem, n, dt, t, snap)) return snap;
  snap = spectral_solve(problem, n, dt, t, {t}).front();
  save_reference(dir, problem, n, dt, snap);
  return snap;
}

std::vector<SpectralSnapshot> reference_snapshots(const std::filesystem::path& dir, const PdeProblem& problem, int n,
                                                  double dt, const std::vector<double>& times) {
  std::vector<SpectralSnapshot> out(times.size());
  bool complete = true;
  for (size_t i = 0; i < times.size() && complete; ++i) complete = load_reference(dir, problem, n, dt, times[i], out[i]);
  if (complete) return out;
  const double T = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
  out = spectral_solve(problem, n, dt, T, times);
  for (const auto& s : out) save_reference(dir, problem, n, dt, s);
  return out;
}

}  // namespace sdtm
