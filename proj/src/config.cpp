#include "vns/config.hpp"

#include "vns/snapshot.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace vns {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  if (pos != t.size() || !std::isfinite(x)) throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(t, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  if (pos != t.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_double(v[i]);
  return s;
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Member>
Key real(const std::string& sec, const std::string& name, Member member) {
  const std::string full = sec + "." + name;
  return {sec, name, [=](RunConfig& c, const std::string& v) { member(c) = to_double(full, v); },
          [=](const RunConfig& c) { return fmt_double(member(const_cast<RunConfig&>(c))); }};
}

template <class Member>
Key integer(const std::string& sec, const std::string& name, Member member) {
  const std::string full = sec + "." + name;
  return {sec, name,
          [=](RunConfig& c, const std::string& v) {
            using T = std::remove_reference_t<decltype(member(c))>;
            const long long x = to_integer(full, v);
            if (x < 0 && std::is_unsigned_v<T>) throw ConfigError(full + ": must be nonnegative");
            member(c) = static_cast<T>(x);
          },
          [=](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); }};
}

template <class Member>
Key text(const std::string& sec, const std::string& name, Member member) {
  return {sec, name, [=](RunConfig& c, const std::string& v) { member(c) = trim(v); },
          [=](const RunConfig& c) { return member(const_cast<RunConfig&>(c)); }};
}

template <class Member>
Key boolean(const std::string& sec, const std::string& name, Member member) {
  const std::string full = sec + "." + name;
  return {sec, name, [=](RunConfig& c, const std::string& v) { member(c) = to_bool(full, v); },
          [=](const RunConfig& c) { return std::string(member(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

template <class Member>
Key real_list(const std::string& sec, const std::string& name, Member member) {
  const std::string full = sec + "." + name;
  return {sec, name, [=](RunConfig& c, const std::string& v) { member(c) = to_list(full, v); },
          [=](const RunConfig& c) { return fmt_list(member(const_cast<RunConfig&>(c))); }};
}

template <class Member>
Key text_list(const std::string& sec, const std::string& name, Member member) {
  return {sec, name, [=](RunConfig& c, const std::string& v) { member(c) = split_list(v); },
          [=](const RunConfig& c) {
            std::string s;
            const auto& items = member(const_cast<RunConfig&>(c));
            for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + items[i];
            return s;
          }};
}

const std::vector<std::string> kDiagnostics{"ledger", "conservation", "vacuum", "characteristics", "ellipticity"};

const std::vector<Key>& schema() {
  static const std::vector<Key> keys = {
      real("params", "A", [](RunConfig& c) -> double& { return c.params.A; }),
      real("params", "gamma", [](RunConfig& c) -> double& { return c.params.gamma; }),
      real("params", "alpha", [](RunConfig& c) -> double& { return c.params.alpha; }),
      real("params", "beta", [](RunConfig& c) -> double& { return c.params.beta; }),
      real("params", "delta1", [](RunConfig& c) -> double& { return c.params.delta1; }),
      real("params", "delta2", [](RunConfig& c) -> double& { return c.params.delta2; }),
      real("params", "calib_C", [](RunConfig& c) -> double& { return c.calib_C; }),
      integer("grid", "dim", [](RunConfig& c) -> int& { return c.dim; }),
      integer("grid", "n", [](RunConfig& c) -> int& { return c.n; }),
      real("grid", "L", [](RunConfig& c) -> double& { return c.L; }),
      text("initial", "density", [](RunConfig& c) -> std::string& { return c.initial.density; }),
      real("initial", "amplitude", [](RunConfig& c) -> double& { return c.initial.amplitude; }),
      real("initial", "width", [](RunConfig& c) -> double& { return c.initial.width; }),
      real("initial", "background", [](RunConfig& c) -> double& { return c.initial.background; }),
      text("initial", "density_file", [](RunConfig& c) -> std::string& { return c.initial.density_file; }),
      text("initial", "velocity", [](RunConfig& c) -> std::string& { return c.initial.velocity; }),
      real("initial", "velocity_amplitude", [](RunConfig& c) -> double& { return c.initial.velocity_amplitude; }),
      integer("initial", "velocity_mode", [](RunConfig& c) -> int& { return c.initial.velocity_mode; }),
      real("initial", "velocity_width", [](RunConfig& c) -> double& { return c.initial.velocity_width; }),
      text("initial", "velocity_file", [](RunConfig& c) -> std::string& { return c.initial.velocity_file; }),
      real("initial", "amplitude_scale", [](RunConfig& c) -> double& { return c.initial.amplitude_scale; }),
      real("solver", "eta0", [](RunConfig& c) -> double& { return c.solver.eta0; }),
      real("solver", "eta_factor", [](RunConfig& c) -> double& { return c.solver.eta_factor; }),
      integer("solver", "eta_levels", [](RunConfig& c) -> int& { return c.solver.eta_levels; }),
      real("solver", "cauchy_tol", [](RunConfig& c) -> double& { return c.solver.cauchy_tol; }),
      real("solver", "picard_tol", [](RunConfig& c) -> double& { return c.solver.picard_tol; }),
      integer("solver", "max_iter", [](RunConfig& c) -> int& { return c.solver.max_iter; }),
      real("solver", "cfl_safety", [](RunConfig& c) -> double& { return c.solver.cfl_safety; }),
      real("solver", "T", [](RunConfig& c) -> double& { return c.solver.T; }),
      real("solver", "cadence", [](RunConfig& c) -> double& { return c.solver.cadence; }),
      real("solver", "dt", [](RunConfig& c) -> double& { return c.solver.dt; }),
      boolean("solver", "limit_solve", [](RunConfig& c) -> bool& { return c.solver.limit_solve; }),
      text("solver", "validity", [](RunConfig& c) -> std::string& { return c.solver.validity; }),
      real("solver", "gmres_tol", [](RunConfig& c) -> double& { return c.solver.gmres_tol; }),
      integer("solver", "seed", [](RunConfig& c) -> std::uint64_t& { return c.solver.seed; }),
      text("output", "directory", [](RunConfig& c) -> std::string& { return c.output.directory; }),
      text_list("output", "diagnostics", [](RunConfig& c) -> std::vector<std::string>& { return c.output.diagnostics; }),
      boolean("output", "snapshots", [](RunConfig& c) -> bool& { return c.output.snapshots; }),
      integer("output", "particles", [](RunConfig& c) -> int& { return c.output.particles; }),
      integer("output", "ellipticity_samples", [](RunConfig& c) -> int& { return c.output.ellipticity_samples; }),
      real("mms", "rho_bar", [](RunConfig& c) -> double& { return c.mms.rho_bar; }),
      real("mms", "eps", [](RunConfig& c) -> double& { return c.mms.eps; }),
      integer("mms", "mode", [](RunConfig& c) -> int& { return c.mms.mode; }),
      real("mms", "omega", [](RunConfig& c) -> double& { return c.mms.omega; }),
      real("mms", "U", [](RunConfig& c) -> double& { return c.mms.U; }),
      real("mms", "nu", [](RunConfig& c) -> double& { return c.mms.nu; }),
      real("mms", "T", [](RunConfig& c) -> double& { return c.mms.T; }),
      real_list("mms", "dts", [](RunConfig& c) -> std::vector<double>& { return c.mms.dts; }),
      real_list("mms", "oracle_dts", [](RunConfig& c) -> std::vector<double>& { return c.mms.oracle_dts; }),
      integer("compare", "levels", [](RunConfig& c) -> int& { return c.compare.levels; }),
  };
  return keys;
}

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : schema()) {
    if (k.section == section && k.name == name) return &k;
  }
  return nullptr;
}

void check(const RunConfig& c) {
  if (c.dim < 1 || c.dim > 3) throw ConfigError("grid.dim must be 1, 2 or 3");
  if (c.n < 8 || (c.n & (c.n - 1)) != 0) throw ConfigError("grid.n must be a power of two >= 8");
  if (!(c.L > 0.0)) throw ConfigError("grid.L must be positive");
  if (!(c.calib_C > 0.0)) throw ConfigError("params.calib_C must be positive");
  const auto& d = c.initial.density;
  if (d != "gaussian" && d != "compact-bump" && d != "constant" && d != "snapshot") {
    throw ConfigError("initial.density must be gaussian, compact-bump, constant or snapshot");
  }
  const auto& v = c.initial.velocity;
  if (v != "zero" && v != "modes" && v != "compression" && v != "snapshot") {
    throw ConfigError("initial.velocity must be zero, modes, compression or snapshot");
  }
  if (d == "snapshot" && c.initial.density_file.empty()) throw ConfigError("initial.density_file is required");
  if (v == "snapshot" && c.initial.velocity_file.empty()) throw ConfigError("initial.velocity_file is required");
  if (!(c.initial.width > 0.0) || !(c.initial.velocity_width > 0.0)) throw ConfigError("widths must be positive");
  if (c.initial.background < 0.0) throw ConfigError("initial.background must be nonnegative");
  if (!(c.solver.T > 0.0)) throw ConfigError("solver.T must be positive");
  if (c.solver.cadence < 0.0 || c.solver.dt < 0.0) throw ConfigError("solver.cadence and solver.dt must be nonnegative");
  if (!(c.solver.cfl_safety > 0.0)) throw ConfigError("solver.cfl_safety must be positive");
  if (!(c.solver.picard_tol > 0.0)) throw ConfigError("solver.picard_tol must be positive");
  if (c.solver.max_iter < 1) throw ConfigError("solver.max_iter must be at least 1");
  if (c.solver.validity != "record" && c.solver.validity != "abort") {
    throw ConfigError("solver.validity must be record or abort");
  }
  if (!(c.solver.eta0 > 0.0 && c.solver.eta0 <= 1.0)) throw ConfigError("solver.eta0 must lie in (0, 1]");
  if (!(c.solver.eta_factor > 0.0 && c.solver.eta_factor < 1.0)) throw ConfigError("solver.eta_factor must lie in (0, 1)");
  if (c.solver.eta_levels < 1) throw ConfigError("solver.eta_levels must be at least 1");
  if (c.solver.cauchy_tol < 0.0) throw ConfigError("solver.cauchy_tol must be nonnegative");
  if (!(c.solver.gmres_tol > 0.0 && c.solver.gmres_tol < 1.0)) throw ConfigError("solver.gmres_tol must lie in (0, 1)");
  for (const auto& d : c.output.diagnostics) {
    if (std::find(kDiagnostics.begin(), kDiagnostics.end(), d) == kDiagnostics.end()) {
      throw ConfigError("output.diagnostics: unknown diagnostic '" + d + "'");
    }
  }
  if (c.output.particles < 0) throw ConfigError("output.particles must be nonnegative");
  if (c.output.ellipticity_samples < 1000) throw ConfigError("output.ellipticity_samples must be at least 1000");
  if (c.mms.dts.size() < 3 || c.mms.oracle_dts.size() < 3) throw ConfigError("mms needs at least three step sizes");
  if (c.compare.levels < 2) throw ConfigError("compare.levels must be at least 2");
}

}  // namespace

RunConfig parse_config(const std::string& input, const std::filesystem::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(input);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig cfg;
  cfg.base_dir = base_dir;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    if (section == "sweep") {
      for (const auto& [key, value] : body) {
        const auto dot = key.find('.');
        if (dot == std::string::npos || !find_key(key.substr(0, dot), key.substr(dot + 1))) {
          throw ConfigError("sweep: unknown key '" + key + "'");
        }
        SweepAxis axis{key, split_list(value.data())};
        if (axis.values.empty()) throw ConfigError("sweep: no values for '" + key + "'");
        cfg.sweep.push_back(std::move(axis));
      }
      continue;
    }
    bool known_section = false;
    for (const auto& k : schema()) known_section = known_section || k.section == section;
    if (!known_section) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      const Key* k = find_key(section, key);
      if (!k) throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
      k->set(cfg, value.data());
    }
  }
  std::sort(cfg.sweep.begin(), cfg.sweep.end(), [](const SweepAxis& a, const SweepAxis& b) { return a.key < b.key; });
  check(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigIoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void apply_override(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  const Key* k = dot == std::string::npos ? nullptr : find_key(dotted_key.substr(0, dot), dotted_key.substr(dot + 1));
  if (!k) throw ConfigError("unknown key '" + dotted_key + "'");
  k->set(cfg, value);
  check(cfg);
}

bool RunConfig::wants(const std::string& diagnostic) const {
  return std::find(output.diagnostics.begin(), output.diagnostics.end(), diagnostic) != output.diagnostics.end();
}

std::string resolved_config(const RunConfig& cfg, bool with_directory) {
  std::string out;
  std::string section;
  for (const auto& k : schema()) {
    if (!with_directory && k.section == "output" && k.name == "directory") continue;
    if (k.section != section) {
      if (!section.empty()) out += "\n";
      section = k.section;
      out += "[" + section + "]\n";
    }
    out += k.name + " = " + k.get(cfg) + "\n";
  }
  return out;
}

std::vector<std::vector<std::pair<std::string, std::string>>> expand_sweep(const RunConfig& cfg) {
  std::vector<std::vector<std::pair<std::string, std::string>>> rows{{}};
  for (const auto& axis : cfg.sweep) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& row : rows) {
      for (const auto& v : axis.values) {
        auto r = row;
        r.emplace_back(axis.key, v);
        next.push_back(std::move(r));
      }
    }
    rows = std::move(next);
  }
  return rows;
}

namespace {

double bump(double r2, double w) {
  const double q = r2 / (w * w);
  return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
}

double radius_sq(const std::array<double, 3>& x, int dim) {
  double r2 = 0.0;
  for (int d = 0; d < dim; ++d) r2 += x[static_cast<std::size_t>(d)] * x[static_cast<std::size_t>(d)];
  return r2;
}

Snapshot load_snapshot(const RunConfig& cfg, const std::string& file, const Grid& g) {
  std::filesystem::path p(file);
  if (p.is_relative()) p = cfg.base_dir / p;
  Snapshot s = read_snapshot(p);
  if (!(s.grid == g)) throw ConfigError("snapshot " + file + " does not match the configured grid");
  return s;
}

}  // namespace

InitialData build_initial(const RunConfig& cfg) {
  const Grid g = cfg.grid();
  const InitialConfig& ic = cfg.initial;
  const double s = ic.amplitude_scale;
  InitialData data{ScalarField(g), VectorField(g)};
  if (ic.density == "snapshot") {
    Snapshot snap = load_snapshot(cfg, ic.density_file, g);
    if (snap.components.size() != 1) throw ConfigError("density snapshot must hold one component");
    data.rho = snap.components[0];
    for (std::size_t i = 0; i < data.rho.size(); ++i) data.rho[i] = ic.background + s * (data.rho[i] - ic.background);
  } else {
    data.rho = ScalarField::sample(g, [&](const std::array<double, 3>& x) {
      const double r2 = radius_sq(x, cfg.dim);
      double shape = 0.0;
      if (ic.density == "gaussian") shape = std::exp(-r2 / (2.0 * ic.width * ic.width));
      if (ic.density == "compact-bump") shape = bump(r2, ic.width);
      return ic.background + s * ic.amplitude * shape;
    });
  }
  for (std::size_t i = 0; i < data.rho.size(); ++i) {
    if (data.rho[i] < 0.0) throw ConfigError("initial density is negative");
  }
  if (ic.velocity == "snapshot") {
    Snapshot snap = load_snapshot(cfg, ic.velocity_file, g);
    if (static_cast<int>(snap.components.size()) != cfg.dim) {
      throw ConfigError("velocity snapshot must hold dim components");
    }
    for (int d = 0; d < cfg.dim; ++d) data.u[d] = snap.components[static_cast<std::size_t>(d)] * s;
  } else if (ic.velocity != "zero") {
    const double a = s * ic.velocity_amplitude;
    const double kw = 2.0 * M_PI * ic.velocity_mode / cfg.L;
    for (int d = 0; d < cfg.dim; ++d) {
      data.u[d] = ScalarField::sample(g, [&](const std::array<double, 3>& x) {
        const double xd = x[static_cast<std::size_t>(d)];
        if (ic.velocity == "modes") return a * std::sin(kw * xd);
        return -a * xd * bump(radius_sq(x, cfg.dim), ic.velocity_width);
      });
    }
  }
  return data;
}

}  // namespace vns
