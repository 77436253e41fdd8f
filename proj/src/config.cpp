#include "sdtm/config.hpp"

#include <fstream>
#include <set>

namespace sdtm {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where.empty() ? "<root>" : where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

template <class T>
void read(const json& j, const std::string& where, const std::string& key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(join(where, key), std::string("wrong type: ") + e.what());
  }
}

template <class T>
void read_opt(const json& j, const std::string& where, const std::string& key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(j, where, key, v);
  out = v;
}

NetworkConfig parse_network(const json& j, const std::string& where, NetworkConfig net) {
  reject_unknown(j, where, {"hidden", "r", "fourier", "scale_n_max"});
  read(j, where, "hidden", net.hidden);
  read(j, where, "r", net.r);
  read_opt(j, where, "scale_n_max", net.scale_n_max);
  if (j.contains("fourier")) {
    const json& f = j.at("fourier");
    if (f.is_string()) {
      const std::string s = f.get<std::string>();
      if (s == "auto") net.fourier = FourierMode::Auto;
      else if (s == "off") net.fourier = FourierMode::Off;
      else throw ConfigError(join(where, "fourier"), "expected \"auto\", \"off\" or a multiplier matrix");
    } else if (f.is_array() && !f.empty()) {
      std::vector<std::vector<int>> rows;
      read(j, where, "fourier", rows);
      const std::size_t cols = rows.front().size();
      IntMatrix b(rows.size(), cols);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw ConfigError(join(where, "fourier"), "ragged multiplier matrix");
        for (std::size_t k = 0; k < cols; ++k) b(i, k) = rows[i][k];
      }
      net.fourier = FourierMode::Custom;
      net.multipliers = b;
    } else {
      throw ConfigError(join(where, "fourier"), "expected \"auto\", \"off\" or a multiplier matrix");
    }
  }
  return net;
}

json network_json(const NetworkConfig& net) {
  json j;
  j["hidden"] = net.hidden;
  j["r"] = net.r;
  if (net.fourier == FourierMode::Auto) j["fourier"] = "auto";
  else if (net.fourier == FourierMode::Off) j["fourier"] = "off";
  else {
    json rows = json::array();
    for (long i = 0; i < net.multipliers.rows(); ++i) {
      json row = json::array();
      for (long k = 0; k < net.multipliers.cols(); ++k) row.push_back(net.multipliers(i, k));
      rows.push_back(row);
    }
    j["fourier"] = rows;
  }
  j["scale_n_max"] = net.scale_n_max ? json(*net.scale_n_max) : json(nullptr);
  return j;
}

std::string source_name(ReferenceSource s) {
  switch (s) {
    case ReferenceSource::Auto: return "auto";
    case ReferenceSource::Exact: return "exact";
    case ReferenceSource::Spectral: return "spectral";
    case ReferenceSource::None: return "none";
  }
  return "auto";
}

ReferenceSource parse_source(const std::string& s) {
  if (s == "auto") return ReferenceSource::Auto;
  if (s == "exact") return ReferenceSource::Exact;
  if (s == "spectral") return ReferenceSource::Spectral;
  if (s == "none") return ReferenceSource::None;
  throw ConfigError("reference.source", "expected auto, exact, spectral or none");
}

}  // namespace

RunConfigFile parse_run_config(const json& j) {
  reject_unknown(j, "",
                 {"problem", "overrides", "scheme", "beta", "dt", "T", "network", "pressure_network", "sampling",
                  "lambda_bc", "lambda", "adaptive", "reinit_every_step", "reference", "seed", "divergence_threshold",
                  "init_abort_residual", "error_every", "snapshot_times", "out_dir"});
  RunConfigFile out;
  SolverConfig& c = out.solver;
  read(j, "", "problem", c.problem);
  read(j, "", "out_dir", out.out_dir);
  if (j.contains("overrides")) {
    const json& o = j.at("overrides");
    reject_unknown(o, "overrides", {"nu", "epsilon", "reaction", "speed", "wave_number", "boundary"});
    read_opt(o, "overrides", "nu", c.overrides.nu);
    read_opt(o, "overrides", "epsilon", c.overrides.epsilon);
    read_opt(o, "overrides", "reaction", c.overrides.reaction);
    read_opt(o, "overrides", "speed", c.overrides.speed);
    read_opt(o, "overrides", "wave_number", c.overrides.wave_number);
    std::optional<std::string> b;
    read_opt(o, "overrides", "boundary", b);
    if (b) {
      try {
        c.overrides.boundary = parse_boundary_kind(*b);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("overrides.boundary", e.what());
      }
    }
  }
  read(j, "", "scheme", c.scheme);
  read(j, "", "beta", c.beta);
  read(j, "", "dt", c.dt);
  read(j, "", "T", c.T);
  if (j.contains("network")) c.network = parse_network(j.at("network"), "network", c.network);
  if (j.contains("pressure_network"))
    c.pressure_network = parse_network(j.at("pressure_network"), "pressure_network", c.pressure_network);
  if (j.contains("sampling")) {
    const json& s = j.at("sampling");
    reject_unknown(s, "sampling", {"kind", "counts", "lhs_points", "boundary_per_face"});
    read(s, "sampling", "kind", c.sampling.kind);
    read(s, "sampling", "counts", c.sampling.counts);
    read(s, "sampling", "lhs_points", c.sampling.lhs_points);
    read(s, "sampling", "boundary_per_face", c.sampling.boundary_per_face);
  }
  read(j, "", "lambda_bc", c.lambda_bc);
  read(j, "", "lambda", c.lambda);
  if (j.contains("adaptive") && !j.at("adaptive").is_null()) {
    const json& a = j.at("adaptive");
    reject_unknown(a, "adaptive", {"epsilon", "r_max", "grid_n"});
    AdaptivePolicy p;
    read(a, "adaptive", "epsilon", p.epsilon);
    read(a, "adaptive", "r_max", p.r_max);
    read(a, "adaptive", "grid_n", p.grid_n);
    c.adaptive = p;
  }
  read(j, "", "reinit_every_step", c.reinit_every_step);
  if (j.contains("reference")) {
    const json& r = j.at("reference");
    reject_unknown(r, "reference", {"source", "test_counts", "spectral_n", "spectral_dt", "spectral_test_points",
                                          "cache_dir"});
    std::string src = "auto";
    read(r, "reference", "source", src);
    c.reference.source = parse_source(src);
    read(r, "reference", "test_counts", c.reference.test_counts);
    read(r, "reference", "spectral_n", c.reference.spectral_n);
    read(r, "reference", "spectral_dt", c.reference.spectral_dt);
    read(r, "reference", "spectral_test_points", c.reference.spectral_test_points);
    read(r, "reference", "cache_dir", c.reference.cache_dir);
  }
  read(j, "", "seed", c.seed);
  read(j, "", "divergence_threshold", c.divergence_threshold);
  read(j, "", "init_abort_residual", c.init_abort_residual);
  read(j, "", "error_every", c.error_every);
  read(j, "", "snapshot_times", c.snapshot_times);
  try {
    make_problem(c.problem);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem", e.what());
  }
  try {
    parse_scheme(c.scheme, c.beta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scheme", e.what());
  }
  c.validate();
  return out;
}

RunConfigFile load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("", "malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

SolverConfig resolve_config(const SolverConfig& config) {
  SolverConfig c = config;
  const PdeProblem p = make_problem(c.problem, c.overrides);
  c.overrides.nu = p.params.nu;
  c.overrides.epsilon = p.params.epsilon;
  c.overrides.reaction = p.params.reaction;
  c.overrides.speed = p.params.speed;
  c.overrides.wave_number = p.params.wave_number;
  c.overrides.boundary = p.boundary;
  const int dim = p.domain.dim();
  if (c.sampling.counts.empty()) c.sampling.counts.assign(dim, dim == 1 ? 1001 : 101);
  if (c.reference.test_counts.empty()) c.reference.test_counts.assign(dim, dim == 1 ? 513 : 65);
  return c;
}

json to_json(const SolverConfig& c) {
  json j;
  j["problem"] = c.problem;
  json o = json::object();
  if (c.overrides.nu) o["nu"] = *c.overrides.nu;
  if (c.overrides.epsilon) o["epsilon"] = *c.overrides.epsilon;
  if (c.overrides.reaction) o["reaction"] = *c.overrides.reaction;
  if (c.overrides.speed) o["speed"] = *c.overrides.speed;
  if (c.overrides.wave_number) o["wave_number"] = *c.overrides.wave_number;
  if (c.overrides.boundary) o["boundary"] = to_string(*c.overrides.boundary);
  j["overrides"] = o;
  j["scheme"] = c.scheme;
  j["beta"] = c.beta;
  j["dt"] = c.dt;
  j["T"] = c.T;
  j["network"] = network_json(c.network);
  j["pressure_network"] = network_json(c.pressure_network);
  j["sampling"] = {{"kind", c.sampling.kind},
                   {"counts", c.sampling.counts},
                   {"lhs_points", c.sampling.lhs_points},
                   {"boundary_per_face", c.sampling.boundary_per_face}};
  j["lambda_bc"] = c.lambda_bc;
  j["lambda"] = c.lambda;
  j["adaptive"] = c.adaptive ? json{{"epsilon", c.adaptive->epsilon},
                                    {"r_max", c.adaptive->r_max},
                                    {"grid_n", c.adaptive->grid_n}}
                             : json(nullptr);
  j["reinit_every_step"] = c.reinit_every_step;
  j["reference"] = {{"source", source_name(c.reference.source)},
                    {"test_counts", c.reference.test_counts},
                    {"spectral_n", c.reference.spectral_n},
                    {"spectral_dt", c.reference.spectral_dt},
                    {"spectral_test_points", c.reference.spectral_test_points},
                    {"cache_dir", c.reference.cache_dir}};
  j["seed"] = c.seed;
  j["divergence_threshold"] = c.divergence_threshold;
  j["init_abort_residual"] = c.init_abort_residual;
  j["error_every"] = c.error_every;
  j["snapshot_times"] = c.snapshot_times;
  return j;
}

}  // namespace sdtm
