#include "vns/runner.hpp"

#include "vns/calculus.hpp"
#include "vns/diagnostics.hpp"
#include "vns/fixedpoint.hpp"
#include "vns/operators.hpp"
#include "vns/oracle.hpp"
#include "vns/snapshot.hpp"

#include "json.hpp"
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace vns {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

/// Left-justifies s to width display columns (UTF-8 aware).
std::string pad(const std::string& s, std::size_t width) {
  std::size_t cols = 0;
  for (unsigned char ch : s) cols += (ch & 0xC0) != 0x80;
  return cols >= width ? s : s + std::string(width - cols, ' ');
}

Json jnum(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json jopt(const std::optional<double>& x) { return x ? jnum(*x) : Json(nullptr); }

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << content;
  f.close();
  if (!f) throw IoError("error writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

fs::path input_path(const RunConfig& cfg, const std::string& file) {
  fs::path p(file);
  return p.is_relative() ? cfg.base_dir / p : p;
}

/// Manifest of every input with its blob hash, and the hash of the manifest.
std::pair<std::string, Json> hash_inputs(const RunConfig& cfg) {
  Json inputs = Json::array();
  std::string manifest;
  auto add = [&](const std::string& name, const std::string& content) {
    const std::string h = git_blob_hash(content);
    inputs.push_back({{"name", name}, {"hash", h}});
    manifest += h + " " + name + "\n";
  };
  add("config", resolved_config(cfg, false));
  if (cfg.initial.density == "snapshot") add("density_file", read_file(input_path(cfg, cfg.initial.density_file)));
  if (cfg.initial.velocity == "snapshot") add("velocity_file", read_file(input_path(cfg, cfg.initial.velocity_file)));
  return {git_blob_hash(manifest), inputs};
}

double constraint_margin(Constraint c, const RawParams& p) {
  switch (c) {
    case Constraint::pressure_positive: return p.A;
    case Constraint::gamma_gt_one: return p.gamma - 1.0;
    case Constraint::alpha_positive: return p.alpha;
    case Constraint::delta1_gt_one: return p.delta1 - 1.0;
    case Constraint::delta2_gt_delta1: return p.delta2 - p.delta1;
    case Constraint::delta2_lower_bound: return p.delta2 - (2.5 * p.delta1 - 1.5);
    case Constraint::min_delta1_gamma: return 3.0 - std::min(p.delta1, p.gamma);
    default: return 0.0;
  }
}

PicardSettings picard_settings(const RunConfig& cfg) {
  PicardSettings ps;
  ps.picard_tol = cfg.solver.picard_tol;
  ps.max_iter = cfg.solver.max_iter;
  ps.solver.cfl_safety = cfg.solver.cfl_safety;
  if (cfg.solver.dt > 0.0) ps.solver.dt_fixed = cfg.solver.dt;
  ps.solver.validity = cfg.solver.validity == "abort" ? ValidityPolicy::abort : ValidityPolicy::record;
  ps.solver.gmres.rel_tol = cfg.solver.gmres_tol;
  return ps;
}

/// Indices of the samples written to the series outputs.
std::vector<std::size_t> output_indices(const std::vector<double>& times, double cadence) {
  std::vector<std::size_t> idx;
  if (times.empty()) return idx;
  if (cadence <= 0.0) {
    for (std::size_t i = 0; i < times.size(); ++i) idx.push_back(i);
    return idx;
  }
  double next = times.front();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= next - 1e-9 * cadence || i + 1 == times.size()) {
      idx.push_back(i);
      while (next <= times[i] + 1e-9 * cadence) next += cadence;
    }
  }
  return idx;
}

void write_failure(const fs::path& dir, const std::string& status, const std::string& phase, double time,
                   const std::string& message, const std::string& input_hash) {
  Json j;
  j["status"] = status;
  j["phase"] = phase;
  j["time"] = jnum(time);
  j["message"] = message;
  j["input_hash"] = input_hash;
  write_file(dir / "failure.json", j.dump(2) + "\n");
}

struct Loaded {
  RunConfig cfg;
  int code = 0;
};

Loaded load(const CliOptions& opt, std::ostream& err) {
  Loaded l;
  try {
    l.cfg = load_config(opt.config);
    if (opt.seed) l.cfg.solver.seed = *opt.seed;
    if (opt.snapshots) l.cfg.output.snapshots = true;
    if (opt.out) l.cfg.output.directory = opt.out->string();
  } catch (const ConfigIoError& e) {
    err << "error: " << e.what() << "\n";
    l.code = static_cast<int>(ExitCode::io);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    l.code = static_cast<int>(ExitCode::validation);
  }
  return l;
}

}  // namespace

std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("sha1: context allocation failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 && EVP_DigestFinal_ex(ctx, md, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("sha1: digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

std::string constraint_label(Constraint c) {
  switch (c) {
    case Constraint::none: return "admissible";
    case Constraint::finite: return "all constants finite";
    case Constraint::pressure_positive: return "A > 0";
    case Constraint::gamma_gt_one: return "γ > 1";
    case Constraint::alpha_positive: return "α > 0";
    case Constraint::delta1_gt_one: return "δ1 > 1";
    case Constraint::delta2_gt_delta1: return "δ2 > δ1";
    case Constraint::delta2_lower_bound: return "δ2 ≥ (5/2)δ1 − 3/2";
    case Constraint::min_delta1_gamma: return "min(δ1, γ) ≤ 3";
  }
  return "unknown";
}

ValidationReport validate_config(const RunConfig& cfg) {
  ValidationReport r;
  std::ostringstream os;
  const RawParams& raw = cfg.params;
  const ParamCheck pc = check_params(raw);
  os << "parameters\n";
  const Constraint order[] = {Constraint::pressure_positive, Constraint::gamma_gt_one,   Constraint::alpha_positive,
                              Constraint::delta1_gt_one,     Constraint::delta2_gt_delta1, Constraint::delta2_lower_bound,
                              Constraint::min_delta1_gamma};
  if (pc.violated == Constraint::finite) os << "  FAIL  all constants finite\n";
  for (Constraint c : order) {
    std::string tag = "ok  ";
    if (pc.violated == c) tag = "FAIL";
    else if (!pc.ok() && static_cast<int>(c) > static_cast<int>(pc.violated)) tag = "--  ";
    os << "  " << tag << "  " << pad(constraint_label(c), 20)
       << "  margin = " << short_num(constraint_margin(c, raw)) << "\n";
  }
  if (!pc.ok()) {
    r.ok = false;
    r.first_violation = constraint_label(pc.violated) + ": " + pc.message;
    os << "rejected: " << r.first_violation << "\n";
    r.text = os.str();
    return r;
  }
  const FluidParams fp = validate_params(raw);
  os << "  a1 = " << short_num(fp.a1) << "\n  m = " << short_num(fp.m) << "\n";
  os << "  density cap = " << (fp.a2_density_cap ? short_num(*fp.a2_density_cap) : std::string("none (beta >= 0)"))
     << "\n";

  InitialData data;
  try {
    data = build_initial(cfg);
  } catch (const ConfigError& e) {
    r.ok = false;
    r.first_violation = std::string("initial data: ") + e.what();
    os << "rejected: " << r.first_violation << "\n";
    r.text = os.str();
    return r;
  }
  os << "initial data\n";
  const CompatibilityReport compat = check_initial_compatibility(fp, data.rho);
  os << "  " << (compat.pass ? "ok  " : "FAIL") << "  (A2) min alpha + beta rho0^(delta2-delta1) = "
     << short_num(compat.margin) << ", max rho0 = " << short_num(compat.max_rho) << "\n";
  if (!compat.pass) {
    r.ok = false;
    r.first_violation = compat.message;
    os << "rejected: " << r.first_violation << "\n";
    r.text = os.str();
    return r;
  }
  if (data.rho.min() < kVacuumEps) {
    const double ext = support_extent(data.rho);
    const double limit = 0.25 * cfg.L;
    const bool ok = ext <= limit;
    os << "  " << (ok ? "ok  " : "FAIL") << "  support extent " << short_num(ext) << " <= L/4 = " << short_num(limit)
       << "\n";
    if (!ok) {
      r.ok = false;
      r.first_violation = "initial support reaches |x| = " + short_num(ext) + " beyond L/4 = " + short_num(limit);
      os << "rejected: " << r.first_violation << "\n";
      r.text = os.str();
      return r;
    }
  } else {
    os << "  no vacuum, min rho0 = " << short_num(data.rho.min()) << "\n";
  }
  const ReformState init = state_from_density(fp, data.rho, data.u);
  const double c0 = initial_level(init);
  const double c3 = std::sqrt(cfg.calib_C) * c0;
  os << "horizon preview\n";
  os << "  c0 = " << short_num(c0) << "\n  c3 = " << short_num(c3) << "\n";
  os << "  T_star_star = min{T, (1+c3)^(-4m-4)} = " << short_num(horizon(cfg.solver.T, c3, fp.m)) << "\n";
  r.text = os.str();
  return r;
}

RunOutcome execute_run(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  RunOutcome o;
  const auto wall_start = std::chrono::steady_clock::now();
  std::ostringstream timing;
  try {
    const auto [hash, inputs] = hash_inputs(cfg);
    o.input_hash = hash;
    make_dirs(out_dir);
    write_file(out_dir / "resolved_config.ini", resolved_config(cfg, false));

    ValidationReport vr;
    try {
      vr = validate_config(cfg);
    } catch (const SnapshotError& e) {
      throw IoError(e.what());
    }
    log << vr.text;
    if (!vr.ok) {
      o.code = ExitCode::validation;
      o.status = "rejected";
      o.message = vr.first_violation;
      write_failure(out_dir, o.status, "validation", 0.0, o.message, o.input_hash);
      return o;
    }

    const FluidParams fp = validate_params(cfg.params);
    const InitialData data = build_initial(cfg);
    const ReformState init = state_from_density(fp, data.rho, data.u);
    const double identity_gap = exponent_identity_gap(fp, init.vphi);
    const PicardSettings ps = picard_settings(cfg);
    const EtaSchedule sched{cfg.solver.eta0, cfg.solver.eta_factor, cfg.solver.eta_levels, cfg.solver.cauchy_tol};

    ContinuationResult cont;
    std::optional<PicardResult> limit;
    std::optional<double> d_limit;
    try {
      cont = eta_continuation(fp, init, sched, cfg.solver.T, ps);
      if (cfg.solver.limit_solve) {
        PicardSettings lp = ps;
        lp.solver.dt_fixed = cont.levels.front().trace.dt;
        limit = picard_solve(fp, init, 0.0, cfg.solver.T, lp);
        if (!limit->trace.converged) {
          throw SolverError("eta limit", init.time + cfg.solver.T,
                            "Picard iteration did not converge in " + std::to_string(lp.max_iter) + " iterations");
        }
        d_limit = trajectory_distance(limit->traj, cont.traj);
      }
    } catch (const SolverError& e) {
      o.code = ExitCode::solver;
      o.status = "failed";
      o.message = e.what();
      log << "solver failure: " << e.what() << "\n";
      write_failure(out_dir, o.status, e.phase(), e.time(), o.message, o.input_hash);
      return o;
    } catch (const std::exception& e) {
      o.code = ExitCode::solver;
      o.status = "failed";
      o.message = e.what();
      log << "solver failure: " << e.what() << "\n";
      write_failure(out_dir, o.status, "solve", init.time, o.message, o.input_hash);
      return o;
    }
    const Trajectory& traj = limit ? limit->traj : cont.traj;
    const std::vector<double> times = traj.times();
    const std::vector<std::size_t> rows = output_indices(times, cfg.solver.cadence);

    const AprioriLedger led = ledger(traj, fp, cfg.calib_C, cfg.solver.T);
    const ValidityVerdict verdict = validity(traj, led, fp);

    Json summary;
    summary["status"] = "ok";
    summary["input_hash"] = o.input_hash;
    summary["inputs"] = inputs;
    summary["seed"] = cfg.solver.seed;
    summary["params"] = {{"A", fp.A},         {"gamma", fp.gamma}, {"alpha", fp.alpha},
                         {"beta", fp.beta},   {"delta1", fp.delta1}, {"delta2", fp.delta2},
                         {"a1", fp.a1},       {"m", fp.m},
                         {"density_cap", fp.a2_density_cap ? jnum(*fp.a2_density_cap) : Json(nullptr)},
                         {"exponent_identity_gap", identity_gap}};
    summary["grid"] = {{"dim", cfg.dim}, {"n", cfg.n}, {"L", cfg.L}};

    Json levels = Json::array();
    std::string trace_csv = "level,eta,k,S,linf_delta\n";
    std::string cont_csv = "level,eta,iterations,converged,final_S,d\n";
    auto add_trace = [&](const std::string& name, double eta, const PicardTrace& tr, const std::optional<double>& d) {
      for (const auto& it : tr.iterations) {
        trace_csv += name + "," + num(eta) + "," + std::to_string(it.k) + "," + num(it.S) + "," + num(it.linf_delta) + "\n";
        timing << "picard " << name << " k=" << it.k << " wall=" << it.wall_time << " s\n";
      }
      const double final_S = tr.iterations.empty() ? 0.0 : tr.iterations.back().S;
      cont_csv += name + "," + num(eta) + "," + std::to_string(tr.final_k) + "," + (tr.converged ? "true" : "false") +
                  "," + num(final_S) + "," + (d ? num(*d) : std::string()) + "\n";
      Json S = Json::array();
      for (const auto& it : tr.iterations) S.push_back(jnum(it.S));
      levels.push_back({{"level", name},
                        {"eta", eta},
                        {"iterations", tr.final_k},
                        {"converged", tr.converged},
                        {"S", S},
                        {"d", jopt(d)}});
    };
    for (const auto& lev : cont.levels) add_trace(std::to_string(lev.j), lev.eta, lev.trace, lev.d);
    if (limit) add_trace("limit", 0.0, limit->trace, d_limit);
    bool converged = true;
    for (const auto& lev : cont.levels) converged = converged && lev.trace.converged;
    summary["continuation"] = {{"dt", cont.levels.front().trace.dt},
                               {"steps", traj.dt_history.size()},
                               {"cauchy_reached", cont.cauchy_reached},
                               {"limit_solve", limit.has_value()},
                               {"converged", converged},
                               {"levels", levels}};

    double ledger_max[3] = {0, 0, 0};
    for (const auto& row : led.rows) {
      for (int s = 0; s < 3; ++s) ledger_max[s] = std::max(ledger_max[s], row.level[static_cast<std::size_t>(s)]);
    }
    Json crossing = Json::array();
    for (const auto& c : led.crossing) crossing.push_back(jopt(c));
    summary["ledger"] = {{"calib_C", led.calib_C},
                         {"T", led.T},
                         {"m", led.m},
                         {"c0", led.c0},
                         {"c1", led.c[0]},
                         {"c2", led.c[1]},
                         {"c3", led.c[2]},
                         {"T1", led.T1},
                         {"T2", led.T2},
                         {"T3", led.T3},
                         {"T_star_star", led.T_star_star},
                         {"level_max", {ledger_max[0], ledger_max[1], ledger_max[2]}},
                         {"ut_level_max", led.rows.back().ut_level},
                         {"max_ratio", {led.max_ratio[0], led.max_ratio[1], led.max_ratio[2]}},
                         {"crossing", crossing},
                         {"ut_crossing", jopt(led.ut_crossing)},
                         {"coeff_min", std::min_element(led.rows.begin(), led.rows.end(), [](const auto& a, const auto& b) {
                                         return a.coeff_min < b.coeff_min;
                                       })->coeff_min}};
    summary["validity"] = {{"t_valid", verdict.t_valid},
                           {"valid_at_start", verdict.valid_at_start},
                           {"whole_window", verdict.whole_window},
                           {"reasons", verdict.reasons}};

    std::size_t clip_vphi = 0, clip_phi = 0;
    double clip_mass = 0.0;
    for (const auto& st : traj.steps) {
      clip_vphi += st.clipped_vphi;
      clip_phi += st.clipped_phi;
      clip_mass = std::max(clip_mass, st.clipped_mass);
    }
    summary["clipping"] = {{"vphi_cells", clip_vphi}, {"phi_cells", clip_phi}, {"max_mass_fraction", clip_mass}};
    double gap = 0.0;
    for (const auto& s : traj.states) gap = std::max(gap, reconstruct_primitive(s, fp).gap);
    summary["reconstruction_gap"] = gap;

    if (cfg.wants("conservation")) {
      const ConservationReport cons = conservation(traj, fp);
      summary["conservation"] = {{"mass_drift", cons.mass_drift}, {"momentum_drift", cons.momentum_drift}};
      std::string csv = "t,mass";
      for (int d = 0; d < cfg.dim; ++d) csv += ",momentum_" + std::to_string(d + 1);
      csv += "\n";
      for (std::size_t i : rows) {
        csv += num(cons.times[i]) + "," + num(cons.mass[i]);
        for (double p : cons.momentum[i]) csv += "," + num(p);
        csv += "\n";
      }
      write_file(out_dir / "conservation.csv", csv);
    }
    if (cfg.wants("vacuum")) {
      const VacuumResidual vac = vacuum_residual(traj, fp);
      summary["vacuum"] = {{"no_vacuum", vac.no_vacuum}, {"max_residual", vac.max}};
      std::string csv = "t,residual\n";
      for (std::size_t i : rows) {
        if (i < vac.per_sample.size()) csv += num(times[i]) + "," + num(vac.per_sample[i]) + "\n";
      }
      write_file(out_dir / "vacuum.csv", csv);
    }
    if (cfg.wants("characteristics") && cfg.output.particles > 0) {
      const CharacteristicsReport ch = characteristics_check(traj, fp, static_cast<std::size_t>(cfg.output.particles));
      summary["characteristics"] = {{"traced", ch.traced}, {"dropped", ch.dropped}, {"max_rel_error", ch.max_rel_error}};
    }
    if (cfg.wants("ellipticity")) {
      const auto samples = static_cast<std::size_t>(cfg.output.ellipticity_samples);
      const EllipticityReport e0 = ellipticity_check(fp, traj.front().vphi, samples, cfg.solver.seed);
      const EllipticityReport e1 = ellipticity_check(fp, traj.back().vphi, samples, cfg.solver.seed);
      summary["ellipticity"] = {{"samples", samples},
                                {"seed", cfg.solver.seed},
                                {"initial_min_ratio", e0.min_ratio},
                                {"final_min_ratio", e1.min_ratio},
                                {"pass", e0.pass && e1.pass}};
    }
    if (cfg.wants("ledger")) {
      std::string csv =
          "t,vphi_h1,vphi_h2,vphi_h3,phi_h1,phi_h2,phi_h3,u_h1,u_h2,u_h3,w2,w3,w4,w2_int,w3_int,w4_int,"
          "vphi_t_h2,phi_t_h2,u_t_h1,u_t_d2,level1,level2,level3,ut_level,coeff_min,T,m,c3,T_star_star\n";
      for (std::size_t i : rows) {
        const LedgerRow& r = led.rows[i];
        std::string line = num(r.t);
        for (const auto* arr : {&r.vphi_h, &r.phi_h, &r.u_h, &r.weighted, &r.weighted_int}) {
          for (double x : *arr) line += "," + num(x);
        }
        for (double x : {r.vphi_t_h2, r.phi_t_h2, r.u_t_h1, r.u_t_d2}) line += "," + num(x);
        for (double x : r.level) line += "," + num(x);
        for (double x : {r.ut_level, r.coeff_min, led.T, led.m, led.c[2], led.T_star_star}) line += "," + num(x);
        csv += line + "\n";
      }
      write_file(out_dir / "ledger.csv", csv);
    }
    write_file(out_dir / "picard_trace.csv", trace_csv);
    write_file(out_dir / "continuation.csv", cont_csv);

    if (cfg.output.snapshots) {
      const fs::path sdir = out_dir / "snapshots";
      make_dirs(sdir);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const ReformState& s = traj.states[rows[k]];
        char tag[32];
        std::snprintf(tag, sizeof tag, "%04zu", k);
        try {
          write_snapshot(sdir / ("vphi_" + std::string(tag) + ".vnsf"), make_snapshot(s.vphi, FieldRole::vphi, s.time));
          write_snapshot(sdir / ("phi_" + std::string(tag) + ".vnsf"), make_snapshot(s.phi, FieldRole::phi, s.time));
          write_snapshot(sdir / ("u_" + std::string(tag) + ".vnsf"), make_snapshot(s.u, s.time));
          write_snapshot(sdir / ("rho_" + std::string(tag) + ".vnsf"),
                         make_snapshot(reconstruct_primitive(s, fp).rho, FieldRole::rho, s.time));
        } catch (const SnapshotError& e) {
          throw IoError(e.what());
        }
      }
      summary["snapshots"] = rows.size();
    }
    write_file(out_dir / "summary.json", summary.dump(2) + "\n");

    o.status = "ok";
    o.t_valid = verdict.t_valid;
    o.c3 = led.c[2];
    o.m = led.m;
    o.T_star_star = led.T_star_star;
    o.converged = converged;
    log << "run complete: t_valid = " << short_num(verdict.t_valid) << ", T_star_star = " << short_num(led.T_star_star)
        << ", Picard levels = " << cont.levels.size() + (limit ? 1 : 0) << "\n";
    timing << "total wall=" << std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count()
           << " s\n";
    write_file(out_dir / "timing.log", timing.str());
  } catch (const IoError& e) {
    o.code = ExitCode::io;
    o.status = "io-error";
    o.message = e.what();
    log << "I/O failure: " << e.what() << "\n";
  }
  return o;
}

int cmd_validate(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  Loaded l = load(opt, err);
  if (l.code) return l.code;
  try {
    const ValidationReport r = validate_config(l.cfg);
    out << r.text;
    if (!r.ok) {
      err << "validation failed: " << r.first_violation << "\n";
      return static_cast<int>(ExitCode::validation);
    }
    out << "valid\n";
    return 0;
  } catch (const SnapshotError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::io);
  }
}

int cmd_run(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  Loaded l = load(opt, err);
  if (l.code) return l.code;
  const RunOutcome o = execute_run(l.cfg, l.cfg.output.directory, out);
  if (o.code != ExitCode::success) err << o.status << ": " << o.message << "\n";
  return static_cast<int>(o.code);
}

int cmd_sweep(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  Loaded l = load(opt, err);
  if (l.code) return l.code;
  const fs::path root = l.cfg.output.directory;
  const auto combos = expand_sweep(l.cfg);
  std::vector<RunOutcome> outcomes(combos.size());
  std::vector<std::string> logs(combos.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < combos.size(); i = next++) {
      std::ostringstream log;
      char tag[32];
      std::snprintf(tag, sizeof tag, "row_%04zu", i);
      RunConfig cfg = l.cfg;
      cfg.sweep.clear();
      try {
        for (const auto& [key, value] : combos[i]) apply_override(cfg, key, value);
        outcomes[i] = execute_run(cfg, root / tag, log);
      } catch (const ConfigError& e) {
        outcomes[i].code = ExitCode::validation;
        outcomes[i].status = "rejected";
        outcomes[i].message = e.what();
      } catch (const std::exception& e) {
        outcomes[i].code = ExitCode::solver;
        outcomes[i].status = "failed";
        outcomes[i].message = e.what();
      }
      logs[i] = log.str();
    }
  };
  const int n_workers = std::max(1, std::min<int>(opt.workers, static_cast<int>(combos.size())));
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::string csv = "row";
  for (const auto& axis : l.cfg.sweep) csv += "," + axis.key;
  csv += ",status,exit_code,t_valid,c3,m,T_star_star,converged,input_hash,message\n";
  int warnings = 0;
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const RunOutcome& o = outcomes[i];
    csv += std::to_string(i);
    for (const auto& kv : combos[i]) csv += "," + csv_quote(kv.second);
    const bool ok = o.status == "ok";
    csv += "," + o.status + "," + std::to_string(static_cast<int>(o.code)) + "," + (ok ? num(o.t_valid) : "") + "," +
           (ok ? num(o.c3) : "") + "," + (ok ? num(o.m) : "") + "," + (ok ? num(o.T_star_star) : "") + "," +
           (ok ? (o.converged ? "true" : "false") : "") + "," + o.input_hash + "," + csv_quote(o.message) + "\n";
    out << "row " << i << ": " << o.status;
    for (const auto& kv : combos[i]) out << " " << kv.first << "=" << kv.second;
    if (ok) out << " t_valid=" << short_num(o.t_valid) << " c3=" << short_num(o.c3);
    if (!o.message.empty()) out << " (" << o.message << ")";
    out << "\n";
    if (!ok) ++warnings;
    if (o.code == ExitCode::io) {
      err << "I/O failure in row " << i << ": " << o.message << "\n";
      return static_cast<int>(ExitCode::io);
    }
  }
  try {
    make_dirs(root);
    write_file(root / "sweep.csv", csv);
    write_file(root / "resolved_config.ini", resolved_config(l.cfg, false));
  } catch (const IoError& e) {
    err << "I/O failure: " << e.what() << "\n";
    return static_cast<int>(ExitCode::io);
  }
  if (warnings > 0) err << "warning: " << warnings << " of " << combos.size() << " rows did not complete\n";
  out << "sweep: " << combos.size() << " rows, " << warnings << " warnings\n";
  return 0;
}

int cmd_mms(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  Loaded l = load(opt, err);
  if (l.code) return l.code;
  const RunConfig& cfg = l.cfg;
  const ParamCheck pc = check_params(cfg.params);
  if (!pc.ok()) {
    err << "validation failed: " << constraint_label(pc.violated) << ": " << pc.message << "\n";
    return static_cast<int>(ExitCode::validation);
  }
  const FluidParams fp = validate_params(cfg.params);
  const Grid g = cfg.grid();
  ManufacturedCase mc;
  mc.rho_bar = cfg.mms.rho_bar;
  mc.eps = cfg.mms.eps;
  mc.k = {2.0 * M_PI * cfg.mms.mode / cfg.L, 0.0, 0.0};
  mc.omega = cfg.mms.omega;
  mc.U = {cfg.mms.U, 0.0, 0.0};
  mc.nu = cfg.mms.nu;
  if (!(mc.rho_bar - std::abs(mc.eps) > 0.0)) {
    err << "validation failed: manufactured density must stay positive\n";
    return static_cast<int>(ExitCode::validation);
  }
  std::vector<double> reform, oracle;
  SpatialResidual spatial;
  try {
    reform = mms_reform_errors(mc, fp, g, cfg.mms.T, cfg.mms.dts);
    oracle = mms_oracle_errors(mc, fp, g, cfg.mms.T, cfg.mms.oracle_dts);
    spatial = mms_spatial_residual(mc, fp, g, 0.0);
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return static_cast<int>(ExitCode::solver);
  }
  const MmsOrders ro = mms_orders(reform);
  const MmsOrders oo = mms_orders(oracle);
  bool pass = true;
  std::string csv = "solver,dt,error,order,flagged\n";
  auto table = [&](const std::string& name, const std::vector<double>& dts, const std::vector<double>& errs,
                   const MmsOrders& ord, double target, double tol) {
    out << name << " (target order " << target << " +/- " << tol << ")\n";
    out << "  dt            error         order\n";
    for (std::size_t i = 0; i < errs.size(); ++i) {
      out << "  " << std::left << std::setw(12) << short_num(dts[i]) << "  " << std::setw(12) << short_num(errs[i]);
      std::string order;
      std::string flag;
      if (i > 0) {
        const double p = ord.orders[i - 1];
        const bool ok = !ord.flagged[i - 1] && std::abs(p - target) <= tol;
        pass = pass && ok;
        order = num(p);
        flag = ord.flagged[i - 1] ? "true" : "false";
        out << "  " << short_num(p) << (ok ? "  pass" : "  FAIL") << (ord.flagged[i - 1] ? " (flagged)" : "");
      }
      out << "\n";
      csv += name + "," + num(dts[i]) + "," + num(errs[i]) + "," + order + "," + flag + "\n";
    }
  };
  table("reform", cfg.mms.dts, reform, ro, 3.0, 0.2);
  table("oracle", cfg.mms.oracle_dts, oracle, oo, 4.0, 0.3);
  const bool spatial_ok = spatial.reform <= 1e-10 && spatial.primitive <= 1e-10;
  pass = pass && spatial_ok;
  out << "spatial residual: reform " << short_num(spatial.reform) << ", primitive " << short_num(spatial.primitive)
      << (spatial_ok ? "  pass" : "  FAIL") << " (threshold 1e-10)\n";
  csv += "spatial_reform,,," + num(spatial.reform) + ",\nspatial_primitive,,," + num(spatial.primitive) + ",\n";
  try {
    const fs::path dir = cfg.output.directory;
    make_dirs(dir);
    write_file(dir / "mms.csv", csv);
  } catch (const IoError& e) {
    err << "I/O failure: " << e.what() << "\n";
    return static_cast<int>(ExitCode::io);
  }
  out << (pass ? "mms: pass\n" : "mms: FAIL\n");
  return pass ? 0 : static_cast<int>(ExitCode::solver);
}

int cmd_oracle_compare(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  Loaded l = load(opt, err);
  if (l.code) return l.code;
  const RunConfig& cfg = l.cfg;
  ValidationReport vr;
  try {
    vr = validate_config(cfg);
  } catch (const SnapshotError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::io);
  }
  if (!vr.ok) {
    out << vr.text;
    err << "validation failed: " << vr.first_violation << "\n";
    return static_cast<int>(ExitCode::validation);
  }
  const FluidParams fp = validate_params(cfg.params);
  const InitialData base = build_initial(cfg);
  if (!(base.rho.min() > 0.0)) {
    err << "oracle requires min ρ>0\n";
    return static_cast<int>(ExitCode::validation);
  }
  PicardSettings ps = picard_settings(cfg);
  const ReformState init = state_from_density(fp, base.rho, base.u);
  const double dt0 = picard_step(fp, init, cfg.solver.T, ps.solver);

  std::vector<CrossCompareReport> reports;
  std::string csv = "level,n,dt,t,distance\n";
  std::string table = "level  n      dt            sup distance  amplitude     iterations  reform mass   oracle mass\n";
  for (int lev = 0; lev < cfg.compare.levels; ++lev) {
    RunConfig c = cfg;
    c.n = cfg.n << lev;
    InitialData data;
    if (cfg.initial.density == "snapshot" || cfg.initial.velocity == "snapshot") {
      data.rho = resample(base.rho, c.grid());
      data.u = resample(base.u, c.grid());
    } else {
      data = build_initial(c);
    }
    PicardSettings lp = ps;
    lp.solver.dt_fixed = dt0 / static_cast<double>(1 << lev);
    try {
      reports.push_back(cross_compare(data.rho, data.u, fp, cfg.solver.T, lp));
    } catch (const std::exception& e) {
      err << "solver failure at level " << lev << ": " << e.what() << "\n";
      return static_cast<int>(ExitCode::solver);
    }
    const CrossCompareReport& r = reports.back();
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      csv += std::to_string(lev) + "," + std::to_string(c.n) + "," + num(*lp.solver.dt_fixed) + "," + num(r.times[i]) +
             "," + num(r.distance[i]) + "\n";
    }
    std::ostringstream row;
    row << std::left << std::setw(5) << lev << "  " << std::setw(5) << c.n << "  " << std::setw(12)
        << short_num(*lp.solver.dt_fixed) << "  " << std::setw(12) << short_num(r.sup_distance) << "  " << std::setw(12)
        << short_num(r.amplitude) << "  " << std::setw(10) << r.trace.final_k << "  " << std::setw(12)
        << short_num(r.reform_mass_drift) << "  " << short_num(r.oracle_mass_drift) << "\n";
    table += row.str();
  }
  out << table;
  bool pass = true;
  const double base_d = reports.front().sup_distance;
  const double tol0 = 5e-3 * std::max(reports.front().amplitude, 1e-300);
  const bool constant = reports.front().amplitude == 0.0;
  if (constant) {
    for (const auto& r : reports) pass = pass && r.sup_distance <= 1e-12;
    out << "constant state: distances " << (pass ? "<= 1e-12  pass" : "above 1e-12  FAIL") << "\n";
  } else {
    const bool ok0 = base_d <= tol0;
    pass = ok0;
    out << "baseline distance " << short_num(base_d) << " <= 5e-3 * amplitude = " << short_num(tol0)
        << (ok0 ? "  pass" : "  FAIL") << "\n";
    for (std::size_t i = 1; i < reports.size(); ++i) {
      const double prev = reports[i - 1].sup_distance;
      const double cur = reports[i].sup_distance;
      const bool ok = cur <= 1.3 * prev / 4.0;
      pass = pass && ok;
      out << "refinement " << i << ": ratio " << short_num(prev / cur) << " (needs >= " << short_num(4.0 / 1.3) << ")"
          << (ok ? "  pass" : "  FAIL") << "\n";
    }
  }
  for (const auto& r : reports) {
    const bool ok = r.oracle_mass_drift <= 1e-10 && r.reform_mass_drift <= 1e-6;
    pass = pass && ok;
  }
  try {
    const fs::path dir = cfg.output.directory;
    make_dirs(dir);
    write_file(dir / "oracle_compare.csv", csv);
  } catch (const IoError& e) {
    err << "I/O failure: " << e.what() << "\n";
    return static_cast<int>(ExitCode::io);
  }
  out << (pass ? "oracle-compare: pass\n" : "oracle-compare: FAIL\n");
  return pass ? 0 : static_cast<int>(ExitCode::solver);
}

}  // namespace vns
