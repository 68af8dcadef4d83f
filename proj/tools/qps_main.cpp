// Command-line front end: batch pipelines over the qps library with
// deterministic CSV/JSON outputs.
//
// Exit codes: 0 success, 2 config error, 3 numeric failure,
//             4 no state passed the localization gate (bloch),
//             5 degenerate conjugation / small divisor (reduce, mp).

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "qps/duality.hpp"
#include "qps/moser_poschel.hpp"
#include "qps/reducibility.hpp"
#include "qps/serialize.hpp"
#include "qps/spectrum.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace qps;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file \"" + path + "\"");
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
}

double get_number(const json& j, const std::string& key, double lo, double hi,
                  std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing numeric field \"" + key + "\"");
  }
  if (!j[key].is_number()) throw ConfigError("field \"" + key + "\" must be a number");
  const double v = j[key].get<double>();
  if (!(v >= lo) || !(v <= hi)) {
    std::ostringstream os;
    os << "field \"" << key << "\" = " << v << " outside [" << lo << ", " << hi << "]";
    throw ConfigError(os.str());
  }
  return v;
}

long get_integer(const json& j, const std::string& key, long lo, long hi,
                 std::optional<long> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing integer field \"" + key + "\"");
  }
  if (!j[key].is_number_integer()) throw ConfigError("field \"" + key + "\" must be an integer");
  const long v = j[key].get<long>();
  if (v < lo || v > hi) {
    std::ostringstream os;
    os << "field \"" << key << "\" = " << v << " outside [" << lo << ", " << hi << "]";
    throw ConfigError(os.str());
  }
  return v;
}

Potential potential_from_config(const json& j, const std::string& key = "potential") {
  if (!j.contains(key)) throw ConfigError("missing \"" + key + "\" object");
  try {
    return potential_from_json(j[key].dump());
  } catch (const std::exception& e) {
    throw ConfigError("bad \"" + key + "\": " + std::string(e.what()));
  }
}

Frequency frequency_from_config(const json& j) {
  if (!j.contains("omega")) throw ConfigError("missing \"omega\"");
  try {
    json wrap;
    wrap["omega"] = j["omega"];
    return frequency_from_json(wrap.dump());
  } catch (const std::exception& e) {
    throw ConfigError("bad \"omega\": " + std::string(e.what()));
  }
}

std::vector<double> grid_from_config(const json& j) {
  if (j.contains("energies")) {
    std::vector<double> out;
    for (const auto& v : j["energies"]) {
      if (!v.is_number()) throw ConfigError("\"energies\" must be numbers");
      out.push_back(v.get<double>());
    }
    if (out.empty()) throw ConfigError("\"energies\" is empty");
    if (!std::is_sorted(out.begin(), out.end()))
      throw ConfigError("\"energies\" must be sorted");
    return out;
  }
  if (!j.contains("grid")) throw ConfigError("missing \"grid\" or \"energies\"");
  const auto& g = j["grid"];
  const double lo = get_number(g, "min", -1e6, 1e6);
  const double hi = get_number(g, "max", -1e6, 1e6);
  const long n = get_integer(g, "points", 2, 1000000);
  if (!(lo < hi)) throw ConfigError("grid: need min < max");
  std::vector<double> out;
  for (long i = 0; i < n; ++i)
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

std::vector<double> phis_from_config(const json& j) {
  std::vector<double> phis{0.5, 1.5, 2.5, 3.5};
  if (j.contains("phis")) {
    phis.clear();
    for (const auto& v : j["phis"]) {
      if (!v.is_number()) throw ConfigError("\"phis\" must be numbers");
      phis.push_back(v.get<double>());
    }
    if (phis.empty()) throw ConfigError("\"phis\" is empty");
  }
  return phis;
}

void write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << text;
  std::cout << "wrote " << (dir / name).string() << "\n";
}

std::string scan_to_json_rows(const SpectralScan& s) {
  json arr = json::array();
  for (size_t i = 0; i < s.grid.size(); ++i) {
    json row;
    row["a"] = s.grid[i];
    row["ids"] = s.ids[i];
    row["ids_err"] = s.ids_err[i];
    if (i < s.lyap.size()) row["lyap"] = s.lyap[i];
    if (i < s.rot.size()) row["rot"] = s.rot[i];
    arr.push_back(row);
  }
  return arr.dump();
}

// ---------------------------------------------------------------- commands

int cmd_scan(const json& cfg, const fs::path& out, const std::string& format, int threads) {
  const auto pot = potential_from_config(cfg);
  const auto omega = frequency_from_config(cfg);
  const auto grid = grid_from_config(cfg);
  ScanOptions opts;
  opts.phis = phis_from_config(cfg);
  opts.threads = threads;
  opts.cocycle_quantities = cfg.value("cocycle", false);
  opts.cocycle_steps = get_integer(cfg, "cocycle_steps", 1000, 1000000000, 100000);
  const int n_half = static_cast<int>(get_integer(cfg, "N", 8, 20000, 500));
  const double plateau_tol = get_number(cfg, "plateau_tol", 1e-8, 0.5, 2e-3);
  FindGapsOptions fg;
  fg.label_kmax = static_cast<int>(get_integer(cfg, "label_kmax", 1, 1000, 20));
  fg.label_tol = get_number(cfg, "label_tol", 1e-8, 0.5, 2e-3);

  const auto hop = schrodinger_hopping();
  const auto s = scan(hop, pot, omega, grid, n_half, opts);
  const auto gaps = find_gaps(s, plateau_tol, fg);

  if (format == "json")
    write_file(out, "scan.json", scan_to_json_rows(s));
  else
    write_file(out, "scan.csv", scan_to_csv(s));
  write_file(out, "gaps.json", gaps_to_json(gaps));
  std::cout << "gaps: " << gaps.size() << "\n";
  return 0;
}

int cmd_cocycle_quantity(const json& cfg, const fs::path& out, bool lyap_mode) {
  const auto pot = potential_from_config(cfg);
  const auto omega = frequency_from_config(cfg);
  std::vector<double> energies;
  if (cfg.contains("a"))
    energies.push_back(get_number(cfg, "a", -1e6, 1e6));
  else
    energies = grid_from_config(cfg);
  const long steps = get_integer(cfg, "steps", 1000, 2000000000, 100000);
  const double theta0 = get_number(cfg, "theta0", -1e6, 1e6, 0.0);
  const long phases = get_integer(cfg, "phases", 0, 1024, 0);

  std::ostringstream csv;
  csv << "a," << (lyap_mode ? "lyap" : "rot") << "\n";
  for (double a : energies) {
    const Cocycle c{a, pot, omega};
    double value;
    if (lyap_mode)
      value = phases > 0 ? lyapunov_avg(c, steps, static_cast<int>(phases))
                         : lyapunov(c, theta0, steps);
    else
      value = phases > 0 ? rotation_number_avg(c, steps, static_cast<int>(phases))
                         : rotation_number(c, theta0, steps);
    csv << format_double(a) << ',' << format_double(value) << "\n";
    std::cout << (lyap_mode ? "lyapunov(" : "rotation(") << format_double(a)
              << ") = " << format_double(value) << "\n";
  }
  write_file(out, lyap_mode ? "lyapunov.csv" : "rotation.csv", csv.str());
  return 0;
}

int cmd_bloch(const json& cfg, const fs::path& out) {
  const auto pot = potential_from_config(cfg);
  const auto omega = frequency_from_config(cfg);
  const double phi = get_number(cfg, "phi", -100.0, 100.0);
  const int n_half = static_cast<int>(get_integer(cfg, "N", 8, 1000, 400));
  LocalizeOptions opts;
  opts.allow_resonant = cfg.value("allow_resonant", false);
  opts.decay_threshold = get_number(cfg, "decay_threshold", 0.0, 100.0, 0.2);
  opts.r2_min = get_number(cfg, "r2_min", 0.0, 1.0, 0.9);
  opts.interior_mass_min = get_number(cfg, "mass_min", 0.0, 1.0, 0.99);
  opts.residual_max = get_number(cfg, "residual_max", 0.0, 1.0, 1e-6);

  const double tau = get_number(cfg, "tau", 1.0, 16.0, 2.0);
  const int window = static_cast<int>(get_integer(cfg, "phase_window", 1, 100000, 1000));
  const auto violations = resonant_phase_violations(phi, omega, tau, window);

  std::vector<BlochWave> states;
  try {
    states = localized_states(pot, omega, phi, n_half, opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "no states: " << e.what() << "\n";
    return 4;
  }
  write_file(out, "bloch.json", bloch_to_json(states, violations));
  std::cout << "states: " << states.size()
            << ", phase violations in window: " << violations.size() << "\n";
  if (states.empty()) {
    std::cerr << "no state passed the localization gate\n";
    return 4;
  }
  return 0;
}

// pick the pool state nearest the requested energy (or by index)
const BlochWave& select_state(const std::vector<BlochWave>& pool, const json& cfg) {
  if (pool.empty()) throw std::runtime_error("state pool is empty");
  if (cfg.contains("state_index")) {
    const long i = get_integer(cfg, "state_index", 0, static_cast<long>(pool.size()) - 1);
    return pool[static_cast<size_t>(i)];
  }
  const double target = get_number(cfg, "energy", -1e6, 1e6);
  size_t best = 0;
  for (size_t i = 1; i < pool.size(); ++i)
    if (std::abs(pool[i].a - target) < std::abs(pool[best].a - target)) best = i;
  return pool[best];
}

int cmd_reduce(const json& cfg, const fs::path& out) {
  const auto pot = potential_from_config(cfg);
  const auto omega = frequency_from_config(cfg);
  const int m_grid = static_cast<int>(get_integer(cfg, "M", 64, 1 << 20, 1024));

  std::vector<BlochWave> pool;
  if (cfg.contains("bloch_file")) {
    std::ifstream in(cfg["bloch_file"].get<std::string>());
    if (!in) throw ConfigError("cannot open bloch_file");
    std::stringstream ss;
    ss << in.rdbuf();
    pool = bloch_from_json(ss.str());
  } else {
    const double phi = get_number(cfg, "phi", -100.0, 100.0);
    const int n_half = static_cast<int>(get_integer(cfg, "N", 8, 1000, 400));
    LocalizeOptions opts;
    opts.allow_resonant = cfg.value("allow_resonant", false) ||
                          nearest_phase_resonance(phi, omega, 1000).resonant;
    opts.r2_min = get_number(cfg, "r2_min", 0.0, 1.0, 0.9);
    pool = localized_states(pot, omega, phi, n_half, opts);
  }
  if (pool.empty()) {
    std::cerr << "reduce: no Bloch states available\n";
    return 4;
  }
  const BlochWave& w = select_state(pool, cfg);
  std::cout << "selected state a = " << format_double(w.a)
            << ", phi = " << format_double(w.phi) << "\n";

  const std::string mode = cfg.value("mode", std::string("auto"));
  const auto res = nearest_phase_resonance(w.phi, omega, 1000);
  const bool want_triangular = mode == "triangular" || (mode == "auto" && res.resonant);

  Conjugation z;
  double c_entry = 0.0;
  if (want_triangular) {
    ResonantReduceOptions opts;
    opts.kcut = static_cast<int>(get_integer(cfg, "kcut", 1, m_grid / 2 - 1, 256));
    opts.div_tol = get_number(cfg, "div_tol", 0.0, 1.0, 1e-10);
    const auto vsol = real_solution_from_bloch(w, omega);
    const auto red = resonant_reduce(vsol, pot, omega, w.a, m_grid, opts);
    z = red.conj;
    c_entry = red.c;
  } else {
    const double dep_tol = get_number(cfg, "dep_tol", 0.0, 1.0, 1e-8);
    const auto y = build_y(w, pot, omega, m_grid, dep_tol);
    z = realify(y);
  }
  write_file(out, "conjugation.json", conjugation_to_json(z));
  std::cout << "kind: " << (z.kind == ConjKind::Triangular ? "triangular" : "rotation")
            << ", residual = " << format_double(z.residual);
  if (z.kind == ConjKind::Triangular) std::cout << ", c = " << format_double(c_entry);
  std::cout << "\n";
  return 0;
}

int cmd_mp(const json& cfg, const fs::path& out) {
  const auto omega = frequency_from_config(cfg);
  const auto w_pot = potential_from_config(cfg, "w");

  Conjugation z;
  if (cfg.contains("conjugation_file")) {
    std::ifstream in(cfg["conjugation_file"].get<std::string>());
    if (!in) throw ConfigError("cannot open conjugation_file");
    std::stringstream ss;
    ss << in.rdbuf();
    z = conjugation_from_json(ss.str());
    if (z.kind != ConjKind::Triangular)
      throw ConfigError("mp needs a triangular conjugation");
  } else {
    // inline pipeline: resonant-phase dual states near the requested energy,
    // reduced until one passes the residual gate
    const auto pot = potential_from_config(cfg);
    const double phi = get_number(cfg, "phi", -100.0, 100.0, 0.0);
    const int n_half = static_cast<int>(get_integer(cfg, "N", 8, 1000, 300));
    const double target = get_number(cfg, "energy", -1e6, 1e6);
    const int m_grid = static_cast<int>(get_integer(cfg, "M", 64, 1 << 20, 1024));
    const double window = get_number(cfg, "energy_window", 0.0, 10.0, 0.05);
    LocalizeOptions lopts;
    lopts.allow_resonant = true;
    lopts.r2_min = get_number(cfg, "r2_min", 0.0, 1.0, 0.8);
    auto pool = localized_states(pot, omega, phi, n_half, lopts);
    std::sort(pool.begin(), pool.end(), [&](const BlochWave& x, const BlochWave& y) {
      return std::abs(x.a - target) < std::abs(y.a - target);
    });
    bool reduced = false;
    for (const auto& cand : pool) {
      if (std::abs(cand.a - target) > window) break;
      try {
        const auto vsol = real_solution_from_bloch(cand, omega);
        auto red = resonant_reduce(vsol, pot, omega, cand.a, m_grid);
        if (red.conj.residual > 1e-5) continue;
        z = red.conj;
        reduced = true;
        break;
      } catch (const std::exception&) {
        continue;
      }
    }
    if (!reduced)
      throw DegenerateY(0.0);  // no reducible edge state near the requested energy
  }

  const int m_avg = static_cast<int>(get_integer(cfg, "avg_grid", 256, 1 << 20, 1024));
  const auto av = mp_averages(z, w_pot, m_avg);
  double alo = 1e-6, ahi = 1e-3;
  long count = 7;
  if (cfg.contains("alphas")) {
    const auto& al = cfg["alphas"];
    alo = get_number(al, "min", 1e-15, 0.5);
    ahi = get_number(al, "max", 1e-15, 0.5);
    count = get_integer(al, "count", 2, 1000, 7);
    if (!(alo < ahi)) throw ConfigError("alphas: need min < max");
  }
  const auto rep = mp_analyze(z.c, av, alo, ahi);
  json jrep = json::parse(mp_report_to_json(rep));
  jrep["energy"] = z.energy;

  if (cfg.value("measure", false)) {
    // sweep the analyzed family A_{a, V - alpha W}; for W = 1 this walks the
    // energies a + alpha (gap side when the prediction says Right)
    const long steps = get_integer(cfg, "steps", 1000, 2000000000, 2000000);
    std::ostringstream csv;
    csv << "alpha,gamma,drot\n";
    std::vector<std::pair<double, double>> gamma_samples, rot_samples;
    const double rot0 = rotation_number(Cocycle{z.energy, z.potential, omega}, 0.0, steps);
    const bool right = rep.predicted_gap_side != GapSide::Left;
    for (long i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      const double alpha = alo * std::pow(ahi / alo, t);
      const auto vg = axpy_potential(z.potential, right ? -alpha : alpha, w_pot);
      const auto vs = axpy_potential(z.potential, right ? alpha : -alpha, w_pot);
      const double g_dich = lyapunov(Cocycle{z.energy, vg, omega}, 0.0, steps);
      const double rot_spec =
          rotation_number(Cocycle{z.energy, vs, omega}, 0.0, steps);
      gamma_samples.emplace_back(alpha, g_dich);
      rot_samples.emplace_back(alpha, std::abs(rot_spec - rot0));
      csv << format_double(alpha) << ',' << format_double(g_dich) << ','
          << format_double(std::abs(rot_spec - rot0)) << "\n";
    }
    write_file(out, "mp_sweep.csv", csv.str());
    try {
      const auto fg = sqrt_fit(gamma_samples);
      jrep["sweep_fit_gamma"] = {{"exponent", fg.exponent},
                                 {"coefficient", fg.coefficient},
                                 {"r2", fg.r2}};
      std::cout << "gamma fit: exponent = " << format_double(fg.exponent)
                << ", coefficient = " << format_double(fg.coefficient) << "\n";
    } catch (const std::exception& e) {
      jrep["sweep_fit_gamma"] = e.what();
    }
    try {
      const auto fr = sqrt_fit(rot_samples);
      jrep["sweep_fit_rot"] = {{"exponent", fr.exponent},
                               {"coefficient", fr.coefficient},
                               {"r2", fr.r2}};
      std::cout << "rot fit: exponent = " << format_double(fr.exponent)
                << ", coefficient = " << format_double(fr.coefficient) << "\n";
    } catch (const std::exception& e) {
      jrep["sweep_fit_rot"] = e.what();
    }
  }
  write_file(out, "mp_report.json", jrep.dump(2));
  std::cout << "c = " << format_double(z.c)
            << ", dichotomy predicted: " << (rep.dichotomy_predicted ? "yes" : "no") << "\n";
  return 0;
}

int cmd_duality(const json& cfg, const fs::path& out) {
  const auto pot = potential_from_config(cfg);
  const auto omega = frequency_from_config(cfg);
  const auto grid = grid_from_config(cfg);
  const auto phis = phis_from_config(cfg);
  const int n_half = static_cast<int>(get_integer(cfg, "N", 8, 20000, 400));
  const auto rep = ids_duality_check(pot, omega, grid, n_half, phis);
  write_file(out, "duality.csv", duality_to_csv(rep));
  std::cout << "max |k^H - k^L| = " << format_double(rep.max_diff) << "\n";
  return 0;
}

int cmd_classify(const json& cfg, const fs::path& out) {
  const auto pot = potential_from_config(cfg);
  const auto omega = frequency_from_config(cfg);
  if (!cfg.contains("energies")) throw ConfigError("missing \"energies\"");
  std::vector<double> energies;
  for (const auto& v : cfg["energies"]) energies.push_back(v.get<double>());
  std::vector<double> hs{0.4, 0.2, 0.1, 0.05, 0.025};
  if (cfg.contains("h_sequence")) {
    hs.clear();
    for (const auto& v : cfg["h_sequence"]) hs.push_back(v.get<double>());
    if (hs.size() < 2) throw ConfigError("\"h_sequence\" needs >= 2 decreasing steps");
  }
  ScanContext ctx;
  ctx.w = schrodinger_hopping();
  ctx.v = pot;
  ctx.omega = omega;
  ctx.phis = phis_from_config(cfg);
  ctx.n_half = static_cast<int>(get_integer(cfg, "N", 8, 20000, 2000));

  json arr = json::array();
  for (double a : energies) {
    const auto r = classify_energy(a, ctx, hs);
    json row;
    row["a"] = a;
    switch (r.kind) {
      case EnergyClass::GapInterior: row["kind"] = "gap_interior"; break;
      case EnergyClass::GapEdgeSqrt: row["kind"] = "gap_edge_sqrt"; break;
      case EnergyClass::SmoothPoint: row["kind"] = "smooth_point"; break;
      case EnergyClass::Undetermined: row["kind"] = "undetermined"; break;
    }
    row["exponent"] = r.exponent;
    row["r2"] = r.r2;
    row["h"] = r.h;
    row["delta"] = r.delta;
    arr.push_back(row);
    std::cout << "a = " << format_double(a) << ": " << row["kind"].get<std::string>()
              << "\n";
  }
  write_file(out, "classify.json", arr.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-periodic Schrodinger operator toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", format = "csv";
  int threads = 1;
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "tabular output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", threads, "worker threads for sweeps")
      ->check(CLI::Range(1, 256));

  const char* names[] = {"scan",    "bloch",    "reduce",   "mp",
                         "duality", "classify", "lyapunov", "rotation"};
  const char* descs[] = {"ids/gap scan over an energy grid",
                         "localized dual states as Bloch waves",
                         "conjugation to constant Floquet form",
                         "averaged perturbation analysis at a gap edge",
                         "ids duality discrepancy",
                         "gap interior / sqrt edge / smooth point",
                         "Lyapunov exponent of the Schrodinger cocycle",
                         "fibered rotation number"};
  for (int i = 0; i < 8; ++i) app.add_subcommand(names[i], descs[i])->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  json cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    const fs::path out(out_dir);
    if (sub == "scan") return cmd_scan(cfg, out, format, threads);
    if (sub == "lyapunov") return cmd_cocycle_quantity(cfg, out, true);
    if (sub == "rotation") return cmd_cocycle_quantity(cfg, out, false);
    if (sub == "bloch") return cmd_bloch(cfg, out);
    if (sub == "reduce") return cmd_reduce(cfg, out);
    if (sub == "mp") return cmd_mp(cfg, out);
    if (sub == "duality") return cmd_duality(cfg, out);
    if (sub == "classify") return cmd_classify(cfg, out);
    std::cerr << "unknown subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateY& e) {
    std::cerr << "reduction failed: " << e.what() << "\n";
    return 5;
  } catch (const SmallDivisorOverflow& e) {
    std::cerr << "reduction failed: " << e.what() << "\n";
    return 5;
  } catch (const VanishingV& e) {
    std::cerr << "reduction failed: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}
