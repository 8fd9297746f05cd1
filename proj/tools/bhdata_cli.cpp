// bhdata: build and verify black hole initial data with prescribed boundary.
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <bhdata/io.hpp>

namespace fs = std::filesystem;
using namespace bhdata;

namespace {

struct Globals {
  std::string config, out = "out", composite;
  int resolution = 0;
  double tolerance = 0;
  bool quiet = false;
};

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Io, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Collects emitted files and writes the manifest last.
class Output {
 public:
  Output(const std::string& dir, json config) : dir_(dir), config_(std::move(config)), started_(utc_now()) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir_.string() + ": " + ec.message());
  }
  void put(const std::string& name, const std::string& text) {
    write_file((dir_ / name).string(), text);
    files_.push_back({{"path", name}, {"bytes", text.size()}, {"sha256", sha256_hex(text)}});
  }
  void put_json(const std::string& name, const json& j) { put(name, j.dump(2) + "\n"); }
  void finish(const std::string& command) {
    json m{{"tool", "bhdata"}, {"version", BHDATA_VERSION}, {"command", command}, {"config", config_},
           {"started", started_}, {"finished", utc_now()}, {"files", files_}};
    write_file((dir_ / "manifest.json").string(), m.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  json config_;
  std::string started_;
  json files_ = json::array();
};

json load_config(const Globals& g) {
  if (g.config.empty()) throw Error(ErrorKind::Usage, "--config is required");
  return parse_json(read_file(g.config), g.config);
}

void say(const Globals& g, const std::string& s) {
  if (!g.quiet) std::cerr << s << "\n";
}

BuildConfig build_config(const Globals& g, const json& j) {
  BuildConfig c = config_from_json(j);
  if (g.resolution > 0) c.angular = g.resolution;
  if (g.tolerance > 0) c.flow_stop_tol = g.tolerance;
  return c;
}

int cmd_build(const Globals& g) {
  const BuildConfig cfg = build_config(g, load_config(g));
  Output out(g.out, config_to_json(cfg));
  try {
    const BuildResult r = build(cfg, [&](const std::string& s) { say(g, s); });
    json rep = report_to_json(r.report, r.composite);
    rep["config"] = config_to_json(cfg);
    rep["stages"] = {{"path_min_R", r.path_min_R},
                     {"equalize_max_trace_gdot", r.equalize.max_trace_gdot},
                     {"find_A_doublings", r.find_a.doublings},
                     {"matching_s0_attempts", r.match.s0_attempts},
                     {"matching_height_gap", r.match.height_gap},
                     {"glue_attempts", r.glue.attempts},
                     {"glue_margin", r.glue.margin},
                     {"glue_d", r.glue.d}};
    if (r.flow)
      rep["stages"]["flow"] = {{"stop_time", r.flow->stop_time},
                               {"final_deviation", r.flow->final_deviation},
                               {"delta_hat", r.flow->delta_hat ? json(*r.flow->delta_hat) : json(nullptr)},
                               {"closure_derivative", r.closure.max_derivative}};
    out.put_json("report.json", rep);
    out.put_json("composite.json", composite_to_json(r.composite));
    out.put("collar.csv", collar_csv(r.composite));
    out.put("profile.csv", profile_csv(r.composite));
    out.finish("build");
    say(g, std::string("build ") + (r.report.pass ? "passed" : "failed") + ", penrose ratio " +
               sci(r.report.penrose_ratio));
    return r.report.pass ? 0 : 2;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Usage || e.kind() == ErrorKind::Io) throw;
    out.put_json("report.json", {{"status", "failed"}, {"pass", false}, {"error", error_to_json(e)},
                                 {"config", config_to_json(cfg)}});
    out.finish("build");
    std::cerr << e.what() << "\n";
    return 2;
  }
}

int cmd_flow(const Globals& g) {
  const json j = load_config(g);
  const BuildConfig cfg = build_config(g, j);
  FlowOptions fo;
  fo.stop_tol = cfg.flow_stop_tol;
  if (j.contains("flow")) {
    const json& f = j.at("flow");
    if (g.tolerance <= 0) fo.stop_tol = f.value("stop_tol", fo.stop_tol);
    fo.t_max = f.value("t_max", fo.t_max);
    fo.rtol = f.value("rtol", fo.rtol);
  }
  Output out(g.out, j);
  try {
    const GridPtr G = AngularGrid::make(cfg.n, cfg.angular);
    const FlowResult r = icf_flow(AxiFunction::cosine_series(G, cfg.coefficients), fo);
    CsvWriter w({"t", "deviation", "rho_min", "rho_max"});
    const std::size_t stride = std::max<std::size_t>(1, r.t.size() / 2000);
    for (std::size_t i = 0; i < r.t.size(); i += stride)
      w.row({r.t[i], r.deviation[i], r.rho[i].minCoeff(), r.rho[i].maxCoeff()});
    if ((r.t.size() - 1) % stride)
      w.row({r.t.back(), r.deviation.back(), r.rho.back().minCoeff(), r.rho.back().maxCoeff()});
    out.put("trajectory.csv", w.str());
    out.put_json("convergence.json",
                 {{"status", "passed"},
                  {"rho_star", r.rho_star},
                  {"delta_hat", r.delta_hat ? json(*r.delta_hat) : json(nullptr)},
                  {"stop_time", r.stop_time},
                  {"final_deviation", r.final_deviation},
                  {"burn_in", r.burn_in},
                  {"monotone_after_burn_in", r.monotone_after_burn_in},
                  {"min_R", r.min_R},
                  {"min_H", r.min_H},
                  {"max_gauss_residual", r.max_gauss_residual},
                  {"steps", r.steps},
                  {"rejected", r.rejected}});
    out.finish("flow");
    say(g, "flow converged: rho* " + sci(r.rho_star) + ", stop time " + sci(r.stop_time));
    return 0;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Usage || e.kind() == ErrorKind::Io) throw;
    out.put_json("convergence.json", {{"status", "failed"}, {"error", error_to_json(e)}});
    out.finish("flow");
    std::cerr << e.what() << "\n";
    return 2;
  }
}

int cmd_bend(const Globals& g) {
  const json j = load_config(g);
  const BuildConfig cfg = build_config(g, j);
  if (!cfg.mass) throw Error(ErrorKind::Usage, "bend needs an absolute mass");
  const json b = j.value("bend", json::object());
  Output out(g.out, j);
  try {
    const double m = *cfg.mass;
    auto base = std::make_shared<const SchwarzschildProfile>(solve_profile(m, cfg.n, default_s_max(m, cfg.n)));
    const double s0 = b.value("s0", base->r0 / 2);
    std::optional<BentProfile> bent;
    if (b.contains("delta")) {
      const double d = b.at("delta").get<double>();
      bent = bend(base, s0, d, cfg.kappa * d);
    } else {
      for (double d = s0 / 2; d > 1e-12 * s0 && !bent; d /= 1.5) {
        try {
          bent = bend(base, s0, d, cfg.kappa * d);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::PositivityFailed) throw;
        }
      }
      if (!bent) throw Error(ErrorKind::PositivityFailed, "no admissible delta below s0/2");
    }
    const BentReport rep = verify_bent_psc(*bent);
    CsvWriter w({"s", "f", "df", "ddf", "R", "factor"});
    const int per = 2000;
    for (int i = 0; i <= per; ++i) {
      const double s = bent->lo() + 2 * bent->delta() * i / per;
      const Jet f = (*bent)(s);
      w.row({s, f.f, f.d1, f.d2, warped_line_curvature(cfg.n, f), s < bent->s0() ? bent->inequality_factor(s) : 0.0});
    }
    out.put("bent.csv", w.str());
    out.put_json("bend.json", {{"status", rep.pass ? "passed" : "failed"},
                               {"mass", m},
                               {"s0", bent->s0()},
                               {"delta", bent->delta()},
                               {"lambda", bent->lambda()},
                               {"sigma_left", bent->sigma(bent->lo()).f},
                               {"min_R_resolved", rep.min_R_resolved},
                               {"resolved", rep.resolved},
                               {"unresolved", rep.unresolved},
                               {"failed", rep.failed},
                               {"min_factor_unresolved", rep.unresolved ? json(rep.min_factor_unresolved) : json(nullptr)},
                               {"max_abs_R_flat", rep.max_abs_R_flat},
                               {"noise_floor", rep.noise_floor}});
    out.finish("bend");
    return rep.pass ? 0 : 2;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Usage || e.kind() == ErrorKind::Io) throw;
    out.put_json("bend.json", {{"status", "failed"}, {"error", error_to_json(e)}});
    out.finish("bend");
    std::cerr << e.what() << "\n";
    return 2;
  }
}

int cmd_glue(const Globals& g) {
  const json j = load_config(g);
  const BuildConfig cfg = build_config(g, j);
  if (!cfg.mass) throw Error(ErrorKind::Usage, "glue needs an absolute mass");
  const json gl = j.value("glue", json::object());
  const double rho = gl.value("rho", 1.0), A = gl.value("A", 2.0);
  Output out(g.out, j);
  try {
    const MatchResult mt = match_parameters(*cfg.mass, cfg.n, A, rho, cfg);
    const RadialProfile f1 = neck_profile(rho, mt.eps, A, cfg.n, A / 2, A);
    const GlueResult r = glue({f1, glue_piece(*mt.bent), cfg.n});
    const Cutoff eta{r.m1, f1.hi(), r.translated.f2.lo(), r.m2, r.delta_cut};
    CsvWriter w({"segment", "s", "f", "df", "ddf", "omega", "R", "H"});
    profile_rows(w, 1, r.f, detail::uniform_points(r.f.lo(), r.m1, 200));
    profile_rows(w, 2, r.f, glue_check_points(eta, r.nu, 200));
    profile_rows(w, 3, r.f, detail::uniform_points(r.m2, r.f.hi(), 200));
    out.put("glue.csv", w.str());
    out.put_json("glue.json", {{"status", "passed"},
                               {"eps", mt.eps},
                               {"s0", mt.s0},
                               {"delta", mt.delta},
                               {"nu", r.nu},
                               {"delta_cut", r.delta_cut},
                               {"margin", r.margin},
                               {"d", r.d},
                               {"min_R", r.min_R},
                               {"window", {r.m1, r.m2}},
                               {"interval", {r.f.lo(), r.f.hi()}}});
    out.finish("glue");
    return 0;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Usage || e.kind() == ErrorKind::Io) throw;
    out.put_json("glue.json", {{"status", "failed"}, {"error", error_to_json(e)}});
    out.finish("glue");
    std::cerr << e.what() << "\n";
    return 2;
  }
}

int cmd_verify(const Globals& g) {
  const json j = parse_json(read_file(g.composite), g.composite);
  const CompositeMetric c = composite_from_json(j);
  const VerificationReport r = verify(c);
  const json rep = report_to_json(r, c);
  if (!g.out.empty() && g.out != "-") {
    Output out(g.out, j.at("config"));
    out.put_json("report.json", rep);
    out.finish("verify");
  }
  if (!g.quiet) std::cout << rep.dump(2) << "\n";
  return r.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bhdata: black hole initial data with prescribed horizon geometry"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(BHDATA_VERSION));
  Globals g;
  auto common = [&](CLI::App* sub, bool config) {
    if (config) sub->add_option("--config", g.config, "JSON config")->required();
    sub->add_option("--out", g.out, "output directory");
    sub->add_option("--resolution", g.resolution, "angular grid size override");
    sub->add_option("--tolerance", g.tolerance, "flow stopping tolerance override");
    sub->add_flag("--quiet", g.quiet, "no progress output");
  };
  auto* b = app.add_subcommand("build", "run the full construction and verify it");
  auto* f = app.add_subcommand("flow", "run the inverse curvature flow alone");
  auto* be = app.add_subcommand("bend", "bend a Schwarzschild profile");
  auto* gl = app.add_subcommand("glue", "match and glue a collar neck to a bent profile");
  auto* v = app.add_subcommand("verify", "re-verify a stored composite");
  for (auto* s : {b, f, be, gl}) common(s, true);
  common(v, false);
  v->add_option("composite", g.composite, "composite.json from a build")->required();
  v->get_option("--out")->default_str("");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (v->parsed() && v->count("--out") == 0) g.out.clear();
  try {
    if (b->parsed()) return cmd_build(g);
    if (f->parsed()) return cmd_flow(g);
    if (be->parsed()) return cmd_bend(g);
    if (gl->parsed()) return cmd_glue(g);
    if (v->parsed()) return cmd_verify(g);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.kind() == ErrorKind::Usage || e.kind() == ErrorKind::Io ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
