#include "qps/serialize.hpp"

#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace qps {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string potential_to_json(const Potential& v) {
  json j;
  j["fourier"] = json::array();
  for (int k = -v.band(); k <= v.band(); ++k) {
    const auto c = v.coeff(k);
    if (std::abs(c) == 0.0 && k != 0) continue;
    j["fourier"].push_back({k, c.real(), c.imag()});
  }
  j["rho"] = v.rho();
  return j.dump();
}

Potential potential_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (!j.contains("fourier") || !j["fourier"].is_array())
    throw std::invalid_argument("potential json: missing \"fourier\" array");
  std::vector<std::pair<int, std::complex<double>>> terms;
  for (const auto& row : j["fourier"]) {
    if (!row.is_array() || row.size() != 3)
      throw std::invalid_argument("potential json: fourier rows must be [k, re, im]");
    terms.emplace_back(row[0].get<int>(),
                       std::complex<double>{row[1].get<double>(), row[2].get<double>()});
  }
  const double rho = j.value("rho", 1.0);
  return make_potential(terms, rho);
}

std::string frequency_to_json(const Frequency& f) {
  json j;
  j["omega"] = f.value();
  return j.dump();
}

Frequency frequency_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (!j.contains("omega")) throw std::invalid_argument("frequency json: missing \"omega\"");
  const auto& w = j["omega"];
  if (w.is_string()) {
    const std::string name = w.get<std::string>();
    if (name == "golden") return Frequency::golden();
    if (name == "silver") return Frequency::silver();
    throw std::invalid_argument("frequency json: unknown name \"" + name + "\"");
  }
  if (w.is_number()) return Frequency::from_value(w.get<double>());
  if (w.is_object() && w.contains("value"))
    return Frequency::from_value(w["value"].get<double>(), w.value("kcheck", 64));
  throw std::invalid_argument("frequency json: omega must be a name, number or object");
}

std::string gaps_to_json(const std::vector<Gap>& gaps) {
  json arr = json::array();
  for (const auto& g : gaps) {
    json j;
    j["lo"] = g.lo;
    j["hi"] = g.hi;
    j["ids"] = g.ids_value;
    if (g.label)
      j["label"] = *g.label;
    else
      j["label"] = nullptr;
    j["collapsed"] = g.collapsed;
    arr.push_back(j);
  }
  json out;
  out["gaps"] = arr;
  return out.dump(2);
}

std::string bloch_to_json(const std::vector<BlochWave>& states,
                          const std::vector<int>& phase_violations) {
  json out;
  out["violations"] = phase_violations;
  json arr = json::array();
  for (const auto& w : states) {
    json j;
    j["a"] = w.a;
    j["phi"] = w.phi;
    json coeffs = json::array();
    for (const auto& c : w.f_coeffs) coeffs.push_back({c.real(), c.imag()});
    j["coeffs"] = coeffs;
    j["decay"] = w.decay_rate;
    j["residual"] = w.residual;
    arr.push_back(j);
  }
  out["states"] = arr;
  return out.dump();
}

namespace {

const char* kind_name(ConjKind k) {
  switch (k) {
    case ConjKind::Raw: return "raw";
    case ConjKind::Rotation: return "rotation";
    case ConjKind::Triangular: return "triangular";
  }
  return "?";
}

}  // namespace

std::string conjugation_to_json(const Conjugation& z) {
  json j;
  j["kind"] = kind_name(z.kind);
  j["residual"] = z.residual;
  j["det_mean"] = {z.det_mean.real(), z.det_mean.imag()};
  j["det_variation"] = z.det_variation;
  if (z.kind == ConjKind::Triangular) j["c"] = z.c;
  json b = json::array();
  for (const auto& e : {z.floquet.a11, z.floquet.a12, z.floquet.a21, z.floquet.a22})
    b.push_back({e.real(), e.imag()});
  j["B"] = b;
  json theta = json::array(), entries = json::array();
  const int m = z.grid_size;
  for (int i = 0; i < m; ++i) {
    const double th = 2.0 * std::numbers::pi * i / m;
    theta.push_back(th);
    const Mat2c zt = z.z_at(th);
    entries.push_back({{zt.a11.real(), zt.a11.imag()},
                       {zt.a12.real(), zt.a12.imag()},
                       {zt.a21.real(), zt.a21.imag()},
                       {zt.a22.real(), zt.a22.imag()}});
  }
  j["theta"] = theta;
  j["Z"] = entries;
  // reload data: exact coefficient arrays and the reduced cocycle
  j["phi"] = z.phi;
  j["energy"] = z.energy;
  j["omega"] = z.omega.value();
  j["potential"] = json::parse(potential_to_json(z.potential));
  json coeffs = json::array();
  for (const auto& e : z.entries) {
    json arr = json::array();
    for (int k = -e.degree(); k <= e.degree(); ++k)
      arr.push_back({k, e.at(k).real(), e.at(k).imag()});
    coeffs.push_back(arr);
  }
  j["entry_coeffs"] = coeffs;
  return j.dump();
}

Conjugation conjugation_from_json(const std::string& text) {
  const json j = json::parse(text);
  Conjugation z;
  const std::string kind = j.at("kind").get<std::string>();
  z.kind = kind == "raw" ? ConjKind::Raw
                         : (kind == "rotation" ? ConjKind::Rotation : ConjKind::Triangular);
  z.residual = j.at("residual").get<double>();
  z.det_mean = {j.at("det_mean")[0].get<double>(), j.at("det_mean")[1].get<double>()};
  z.det_variation = j.at("det_variation").get<double>();
  if (j.contains("c")) z.c = j["c"].get<double>();
  z.phi = j.value("phi", 0.0);
  z.energy = j.at("energy").get<double>();
  z.omega = Frequency::from_value(j.at("omega").get<double>(), 0);
  z.potential = potential_from_json(j.at("potential").dump());
  const auto& b = j.at("B");
  z.floquet = {{b[0][0].get<double>(), b[0][1].get<double>()},
               {b[1][0].get<double>(), b[1][1].get<double>()},
               {b[2][0].get<double>(), b[2][1].get<double>()},
               {b[3][0].get<double>(), b[3][1].get<double>()}};
  z.grid_size = static_cast<int>(j.at("theta").size());
  const auto& coeffs = j.at("entry_coeffs");
  for (int e = 0; e < 4; ++e) {
    const auto& arr = coeffs[static_cast<size_t>(e)];
    const int deg = (static_cast<int>(arr.size()) - 1) / 2;
    FourierSeries f(deg);
    for (const auto& row : arr)
      f.at(row[0].get<int>()) = {row[1].get<double>(), row[2].get<double>()};
    z.entries[static_cast<size_t>(e)] = f;
  }
  return z;
}

std::vector<BlochWave> bloch_from_json(const std::string& text) {
  const json j = json::parse(text);
  std::vector<BlochWave> out;
  for (const auto& s : j.at("states")) {
    BlochWave w;
    w.a = s.at("a").get<double>();
    w.phi = s.at("phi").get<double>();
    const auto& coeffs = s.at("coeffs");
    w.n_half = (static_cast<int>(coeffs.size()) - 1) / 2;
    for (const auto& c : coeffs)
      w.f_coeffs.push_back({c[0].get<double>(), c[1].get<double>()});
    w.decay_rate = s.value("decay", 0.0);
    w.residual = s.value("residual", -1.0);
    out.push_back(std::move(w));
  }
  return out;
}

std::string mp_report_to_json(const MPReport& r) {
  json j;
  j["c"] = r.c;
  j["avg11"] = r.avg11;
  j["avg1112"] = r.avg1112;
  j["avg12"] = r.avg12;
  j["d_tilde"] = r.d_tilde;
  j["condition_cne0"] = r.condition_c_ne0;
  j["condition_ce0"] = r.condition_c_eq0;
  j["condition_alpha"] = r.condition_alpha;
  j["dichotomy_predicted"] = r.dichotomy_predicted;
  j["predicted_gap_side"] = r.predicted_gap_side == GapSide::None
                                ? "none"
                                : (r.predicted_gap_side == GapSide::Left ? "left" : "right");
  j["predicted_gamma"] = r.predicted_gamma;
  j["predicted_rot_coeff"] = r.predicted_rot_coeff;
  return j.dump(2);
}

std::string scan_to_csv(const SpectralScan& s) {
  std::ostringstream os;
  os << "a,ids,ids_err,lyap,rot\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (size_t i = 0; i < s.grid.size(); ++i) {
    os << format_double(s.grid[i]) << ',' << format_double(s.ids[i]) << ','
       << format_double(s.ids_err[i]) << ','
       << format_double(i < s.lyap.size() ? s.lyap[i] : nan) << ','
       << format_double(i < s.rot.size() ? s.rot[i] : nan) << '\n';
  }
  return os.str();
}

std::string duality_to_csv(const DualityReport& r) {
  std::ostringstream os;
  os << "a,ids_h,ids_l,diff\n";
  for (size_t i = 0; i < r.grid.size(); ++i) {
    os << format_double(r.grid[i]) << ',' << format_double(r.ids_h[i]) << ','
       << format_double(r.ids_l[i]) << ',' << format_double(std::abs(r.ids_h[i] - r.ids_l[i]))
       << '\n';
  }
  return os.str();
}

}  // namespace qps
