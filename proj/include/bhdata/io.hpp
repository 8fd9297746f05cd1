#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "pipeline.hpp"

namespace bhdata {

using json = nlohmann::json;

// ---------- files ----------

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

inline json parse_json(const std::string& text, const std::string& what) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw Error(ErrorKind::Io, what + " is empty");
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, what + ": " + e.what());
  }
}

// Rows of numbers with a header line, full precision.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) {
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }
  void row(const std::vector<double>& v) {
    char buf[32];
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v[i]);
      os_ << (i ? "," : "") << buf;
    }
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

// ---------- config ----------

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::Usage, std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

inline BuildConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Usage, "config must be a JSON object");
  BuildConfig c;
  c.n = detail::get_or(j, "n", c.n);
  if (c.n < 3) throw Error(ErrorKind::Usage, "n must be at least 3");
  if (j.contains("input")) {
    const json& in = j.at("input");
    const std::string cls = detail::get_or<std::string>(in, "class", "conformal");
    if (cls == "conformal")
      c.input = InputClass::Conformal;
    else if (cls == "star_shaped")
      c.input = InputClass::StarShaped;
    else
      throw Error(ErrorKind::Usage,
                  "unsupported input class '" + cls +
                      "': only conformal factors and star-shaped radial graphs have a constructive path; a general "
                      "PSC metric needs the non-constructive path-connectedness step");
    c.coefficients = detail::get_or(in, "coefficients", c.coefficients);
    if (c.coefficients.empty()) throw Error(ErrorKind::Usage, "input.coefficients must not be empty");
  }
  if (j.contains("mass")) c.mass = detail::get_or(j, "mass", 0.0);
  if (j.contains("mass_ratio")) c.mass_ratio = detail::get_or(j, "mass_ratio", 0.0);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    c.angular = detail::get_or(g, "angular", c.angular);
    c.path_samples = detail::get_or(g, "path_samples", c.path_samples);
  }
  if (c.angular < 8) throw Error(ErrorKind::Usage, "grid.angular must be at least 8");
  if (c.path_samples < 5) throw Error(ErrorKind::Usage, "grid.path_samples must be at least 5");
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    c.flow_stop_tol = detail::get_or(t, "flow_stop", c.flow_stop_tol);
    c.closure_tol = detail::get_or(t, "closure", c.closure_tol);
  }
  if (j.contains("bend")) c.kappa = detail::get_or(j.at("bend"), "kappa", c.kappa);
  c.verify_refine = detail::get_or(j, "verify_refine", c.verify_refine);
  c.output_dir = detail::get_or(j, "output_dir", c.output_dir);
  return c;
}

// Snapshot without the output location, so reports do not depend on where they are written.
inline json config_to_json(const BuildConfig& c) {
  json j;
  j["n"] = c.n;
  j["input"] = {{"class", c.input == InputClass::Conformal ? "conformal" : "star_shaped"},
                {"coefficients", c.coefficients}};
  if (c.mass) j["mass"] = *c.mass;
  if (c.mass_ratio) j["mass_ratio"] = *c.mass_ratio;
  j["grid"] = {{"angular", c.angular}, {"path_samples", c.path_samples}};
  j["tolerances"] = {{"flow_stop", c.flow_stop_tol}, {"closure", c.closure_tol}};
  j["bend"] = {{"kappa", c.kappa}};
  j["verify_refine"] = c.verify_refine;
  return j;
}

// ---------- composite ----------

namespace detail {

inline json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Eigen::VectorXd vec(const json& j, int N, const char* what) {
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::Io, std::string("composite: bad array ") + what);
  }
  if (int(v.size()) != N) throw Error(ErrorKind::Io, std::string("composite: wrong length for ") + what);
  return Eigen::Map<Eigen::VectorXd>(v.data(), N);
}

template <class T>
T need(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::Io, std::string("composite: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::Io, std::string("composite: bad field '") + key + "'");
  }
}

}  // namespace detail

inline json composite_to_json(const CompositeMetric& c) {
  json j;
  j["format"] = "bhdata-composite";
  j["version"] = 1;
  j["config"] = config_to_json(c.config);
  j["n"] = c.n;
  j["angular"] = c.path.grid->size();
  j["vol"] = c.vol;
  json col;
  col["A"] = c.A;
  col["eps"] = c.eps;
  col["rho"] = c.rho;
  col["t"] = c.path.t;
  col["flags"] = {{"volume_normalized", c.path.volume_normalized},
                  {"plateau", c.path.plateau},
                  {"equalized", c.path.equalized}};
  json samples = json::array();
  for (const auto& p : c.path.s)
    samples.push_back({{"a", detail::vec(p.a)}, {"da", detail::vec(p.da)}, {"dda", detail::vec(p.dda)},
                       {"b", detail::vec(p.b)}, {"db", detail::vec(p.db)}, {"ddb", detail::vec(p.ddb)}});
  col["samples"] = samples;
  if (c.path.top_theta) {
    col["top_theta"] = detail::vec(*c.path.top_theta);
    col["top_dtheta"] = detail::vec(*c.path.top_dtheta);
  }
  j["collar"] = col;
  j["bridge"] = {{"nu", c.nu}, {"delta_cut", c.delta_cut}, {"m1", c.m1}, {"m2", c.m2}, {"shift", c.shift}};
  j["bent"] = {{"mass", c.bent_mass}, {"s0", c.s0}, {"delta", c.delta}, {"lambda", c.lambda}};
  j["tail"] = {{"mass", c.tail_mass}, {"shift", c.shift}, {"start", c.tail_start()}};
  return j;
}

inline CompositeMetric composite_from_json(const json& j) {
  if (!j.is_object() || !j.contains("format") || j.at("format") != "bhdata-composite")
    throw Error(ErrorKind::Io, "not a composite file");
  CompositeMetric c;
  c.config = config_from_json(detail::need<json>(j, "config"));
  c.n = detail::need<int>(j, "n");
  const int N = detail::need<int>(j, "angular");
  c.vol = detail::need<double>(j, "vol");
  const json col = detail::need<json>(j, "collar");
  c.A = detail::need<double>(col, "A");
  c.eps = detail::need<double>(col, "eps");
  c.rho = detail::need<double>(col, "rho");
  c.path.grid = AngularGrid::make(c.n, N);
  c.path.t = detail::need<std::vector<double>>(col, "t");
  const json flags = detail::need<json>(col, "flags");
  c.path.volume_normalized = detail::need<bool>(flags, "volume_normalized");
  c.path.plateau = detail::need<bool>(flags, "plateau");
  c.path.equalized = detail::need<bool>(flags, "equalized");
  const json samples = detail::need<json>(col, "samples");
  if (!samples.is_array() || samples.size() != c.path.t.size() || samples.size() < 2)
    throw Error(ErrorKind::Io, "composite: collar samples do not match t");
  for (const auto& s : samples)
    c.path.s.push_back({detail::vec(s.at("a"), N, "a"), detail::vec(s.at("da"), N, "da"),
                        detail::vec(s.at("dda"), N, "dda"), detail::vec(s.at("b"), N, "b"),
                        detail::vec(s.at("db"), N, "db"), detail::vec(s.at("ddb"), N, "ddb")});
  if (col.contains("top_theta")) {
    c.path.top_theta = detail::vec(col.at("top_theta"), N, "top_theta");
    c.path.top_dtheta = detail::vec(col.at("top_dtheta"), N, "top_dtheta");
  }
  const json br = detail::need<json>(j, "bridge");
  c.nu = detail::need<double>(br, "nu");
  c.delta_cut = detail::need<double>(br, "delta_cut");
  c.m1 = detail::need<double>(br, "m1");
  c.m2 = detail::need<double>(br, "m2");
  c.shift = detail::need<double>(br, "shift");
  const json be = detail::need<json>(j, "bent");
  c.bent_mass = detail::need<double>(be, "mass");
  c.s0 = detail::need<double>(be, "s0");
  c.delta = detail::need<double>(be, "delta");
  c.lambda = detail::need<double>(be, "lambda");
  c.tail_mass = detail::need<double>(detail::need<json>(j, "tail"), "mass");
  if (!(c.A > 0 && c.rho > 0 && c.bent_mass > 0 && c.tail_mass > 0 && c.delta > 0 && c.s0 > c.delta && c.nu > 0))
    throw Error(ErrorKind::Io, "composite: parameters out of range");
  return c;
}

// ---------- report ----------

inline json report_to_json(const VerificationReport& r, const CompositeMetric& c) {
  json j;
  json segs = json::array();
  for (const auto& s : r.segments)
    segs.push_back({{"name", s.name}, {"lo", s.lo}, {"hi", s.hi}, {"min_R", s.min_R}, {"max_abs_R", s.max_abs_R},
                    {"min_H", s.name == "collar" ? json(nullptr) : json(s.min_H)}});
  j["segments"] = segs;
  json joints = json::array();
  for (const auto& s : r.joints)
    joints.push_back({{"name", s.name}, {"at", s.at}, {"value_gap", s.value_gap}, {"slope_gap", s.slope_gap}, {"ok", s.ok}});
  j["joints"] = joints;
  json scan = json::array();
  for (const auto& [e, m] : r.eps_scan) scan.push_back({{"eps", e}, {"min_R", m}});
  j["collar_eps_scan"] = scan;
  j["collar_min_R_full"] = r.collar_min_R_full;
  j["boundary_H"] = r.boundary_H;
  j["min_slice_H"] = r.min_slice_H;
  j["boundary_isometry"] = r.boundary_isometry;
  j["vol"] = r.vol;
  j["adm_mass"] = r.adm_mass;
  j["misner_sharp_far"] = r.misner_sharp_far;
  j["threshold_mass"] = r.threshold;
  j["penrose_ratio"] = r.penrose_ratio;
  j["max_trace_gdot"] = r.max_trace_gdot;
  j["bent"] = {{"noise_floor", r.bent_noise_floor}, {"unresolved_samples", r.bent_unresolved}};
  j["parameters"] = {{"A", c.A},         {"eps", c.eps},       {"rho", c.rho},       {"s0", c.s0},
                     {"delta", c.delta}, {"lambda", c.lambda}, {"nu", c.nu},         {"delta_cut", c.delta_cut},
                     {"mass", c.tail_mass}};
  j["clauses"] = {{"boundary_minimal", r.clause_minimal},
                  {"boundary_isometric", r.clause_isometric},
                  {"schwarzschild_end", r.clause_schwarzschild},
                  {"mean_convex_foliation", r.clause_foliation},
                  {"positive_scalar_curvature", r.clause_psc},
                  {"penrose_ratio_above_one", r.clause_penrose},
                  {"joints_continuous", r.joints_ok}};
  j["pass"] = r.pass;
  j["status"] = r.pass ? "passed" : "failed";
  return j;
}

inline json error_to_json(const Error& e) {
  json j{{"kind", to_string(e.kind())}, {"message", e.what()}};
  if (const auto* s = dynamic_cast<const StageError*>(&e)) j["stage"] = s->stage();
  return j;
}

// ---------- sampled dumps ----------

inline std::string collar_csv(const CompositeMetric& c, int refine = 1) {
  CsvWriter w({"t", "theta", "a", "beta", "R", "H"});
  const CollarMetric col{c.A, c.eps, c.path};
  const auto& th = c.path.grid->theta();
  for (double t : collar_slices(c.path, refine)) {
    if (t > 0.5) break;
    const PathSample p = c.path.at(t);
    const Eigen::VectorXd R = collar_curvature_nodes(col, t), H = collar_mean_curvature_nodes(col, t);
    const double sp = std::sqrt(col.stretch(t));
    for (int j = 0; j < th.size(); ++j) w.row({t, th[j], sp * p.a[j], sp * p.b[j], R[j], H[j]});
  }
  return w.str();
}

inline void profile_rows(CsvWriter& w, double tag, const RadialProfile& f, const std::vector<double>& pts) {
  for (double s : pts) {
    const Jet j = f(s);
    w.row({tag, s, j.f, j.d1, j.d2, omega(f.dim(), j), warped_line_curvature(f.dim(), j), f.dim() * j.d1 / j.f});
  }
}

// Segment codes: 1 neck, 2 bridge, 3 bent, 4 tail.
inline std::string profile_csv(const CompositeMetric& c, int per = 400) {
  const CompositeProfiles P = composite_profiles(c);
  CsvWriter w({"segment", "s", "f", "df", "ddf", "omega", "R", "H"});
  profile_rows(w, 1, P.neck.restricted(c.A / 2, c.m1), detail::uniform_points(c.A / 2, c.m1, per));
  profile_rows(w, 2, P.bridge.restricted(c.m1, c.m2), glue_check_points(P.eta, c.nu, per / 4));
  profile_rows(w, 3, P.bent, detail::uniform_points(P.bent.lo(), P.bent.hi(), per));
  profile_rows(w, 4, P.tail, detail::tail_points(P.tail, per));
  return w.str();
}

}  // namespace bhdata
