#include "qkforge/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace qkforge {

using nlohmann::json;

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t{
      {"poly", 1e-5},       {"swann", 1e-5}, {"monopole", 1e-4}, {"closure", 1e-8},
      {"qindep", 1e-8},     {"fixture", 1e-6}, {"bogomolnyi", 1e-4}, {"vconstraints", 1e-5},
      {"cone", 1e-5},       {"complex", 1e-3}, {"cp", 1e-8},
  };
  return t;
}

void RunConfig::validate() const {
  if (model.empty() == prepotential.empty()) throw ConfigError("give exactly one of --model or --prepotential");
  if (points < 1) throw ConfigError("points must be >= 1");
  for (const auto& [k, v] : tol) {
    if (!default_tolerances().count(k)) throw ConfigError("unknown tolerance class '" + k + "'");
    if (!(v > 0.0)) throw ConfigError("tolerance '" + k + "' must be positive");
  }
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("bad flag for " + key + ": '" + v + "'");
}

}  // namespace

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "model") cfg.model = value;
  else if (key == "prepotential") cfg.prepotential = value;
  else if (key == "degree") cfg.degree = parse_double(key, value);
  else if (key == "points") {
    double p = parse_double(key, value);
    if (p != std::floor(p)) throw ConfigError("points must be an integer");
    cfg.points = static_cast<int>(p);
  } else if (key == "seed") {
    double s = parse_double(key, value);
    if (s < 0 || s != std::floor(s)) throw ConfigError("seed must be a non-negative integer");
    cfg.seed = static_cast<unsigned long>(s);
  } else if (key == "exhaustive") cfg.exhaustive = parse_bool(key, value);
  else if (key == "out") cfg.out = value;
  else if (key.rfind("tol.", 0) == 0) {
    std::string cls = key.substr(4);
    if (!default_tolerances().count(cls)) throw ConfigError("unknown tolerance class '" + cls + "'");
    double t = parse_double(key, value);
    if (!(t > 0.0)) throw ConfigError("tolerance '" + cls + "' must be positive");
    cfg.tol[cls] = t;
  }
  else throw ConfigError("unknown config key '" + key + "'");
}

void apply_tolerance(RunConfig& cfg, const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("--tol expects <class>=<value>, got '" + spec + "'");
  apply_config_line(cfg, "tol." + trim(spec.substr(0, eq)), trim(spec.substr(eq + 1)));
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

json to_json(const Report& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"anchor", c.anchor},
                      {"points", c.points},
                      {"max_residual", c.max_residual},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass},
                      {"skipped", c.skipped},
                      {"reason", c.reason},
                      {"worst_point", c.worst_point}});
  }
  return {{"model", r.model},
          {"n", r.n},
          {"pass", r.pass},
          {"checks", checks},
          {"environment",
           {{"seed", r.seed}, {"points", r.points}, {"exhaustive", r.exhaustive}, {"steps", r.steps},
            {"version", r.version}}}};
}

Report report_from_json(const json& j) {
  Report r;
  r.model = j.at("model").get<std::string>();
  r.n = j.at("n").get<int>();
  r.pass = j.at("pass").get<bool>();
  const auto& env = j.at("environment");
  r.seed = env.at("seed").get<unsigned long>();
  r.points = env.at("points").get<int>();
  r.exhaustive = env.at("exhaustive").get<bool>();
  r.steps = env.at("steps").get<std::vector<double>>();
  r.version = env.at("version").get<std::string>();
  for (const auto& c : j.at("checks")) {
    CheckRecord k;
    k.name = c.at("name").get<std::string>();
    k.anchor = c.at("anchor").get<std::string>();
    k.points = c.at("points").get<int>();
    // non-finite residuals serialize as null
    k.max_residual = c.at("max_residual").is_null() ? std::numeric_limits<double>::infinity()
                                                    : c.at("max_residual").get<double>();
    k.tolerance = c.at("tolerance").get<double>();
    k.pass = c.at("pass").get<bool>();
    k.skipped = c.at("skipped").get<bool>();
    k.reason = c.at("reason").get<std::string>();
    k.worst_point = c.at("worst_point").get<std::vector<double>>();
    r.checks.push_back(std::move(k));
  }
  return r;
}

std::string serialize(const Report& r) { return to_json(r).dump(2) + "\n"; }

int exit_status(const Report& r) {
  for (const auto& c : r.checks)
    if (!c.pass) return 1;
  return 0;
}

ResolvedModel resolve_model(const RunConfig& cfg) {
  cfg.validate();
  if (!cfg.model.empty()) {
    const ModelFixture* fx;
    try {
      fx = &fixture(cfg.model);
    } catch (const UnknownModelError& e) {
      throw ConfigError(e.what());
    }
    return {fx->id, fx->F(), fx};
  }
  Prepotential p;
  try {
    p = Prepotential::from_expression(cfg.prepotential);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("prepotential: ") + e.what());
  }
  if (cfg.degree != 2.0)
    throw ConfigError("prepotential: declared degree must be 2 (got " + std::to_string(cfg.degree) + ")");
  auto h = prepotential_homogeneity(p, cfg.degree, 20, static_cast<unsigned>(cfg.seed));
  if (!(h.scaling < 1e-8) || !(h.euler < 1e-6))
    throw ConfigError("prepotential is not homogeneous of degree " + std::to_string(cfg.degree) +
                      " (scaling residual " + std::to_string(h.scaling) + ")");
  return {cfg.prepotential, FFunction::cmap(p), nullptr};
}

namespace {

bool is_singular_error(const std::exception& e) {
  return dynamic_cast<const SingularPointError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
         dynamic_cast<const DegeneratePointError*>(&e);
}

std::vector<double> flatten(const SamplePoint& p) {
  std::vector<double> v(p.chart);
  v.insert(v.end(), {p.q.w, p.q.x, p.q.y, p.q.z});
  return v;
}

struct PointOutcome {
  double residual = 0.0;
  std::vector<double> point;
  std::string skip;
  std::string fail;
};

constexpr int kAttempts = 10;

template <class Fn>
CheckRecord run_check(const std::string& name, const std::string& anchor, double tol, int count, unsigned long seed,
                      int check_index, int n, Fn fn) {
  auto results = parallel_map<PointOutcome>(count, [&](int i) {
    std::seed_seq ss{static_cast<unsigned>(seed & 0xffffffffu), static_cast<unsigned>(seed >> 32),
                     static_cast<unsigned>(check_index), static_cast<unsigned>(i)};
    std::mt19937_64 rng(ss);
    PointOutcome o;
    for (int a = 0; a < kAttempts; ++a) {
      SamplePoint p = sample_point(n, rng);
      try {
        o.residual = fn(p);
        o.point = flatten(p);
        o.skip.clear();
        return o;
      } catch (const std::exception& e) {
        if (!is_singular_error(e)) {
          o.fail = e.what();
          o.point = flatten(p);
          return o;
        }
        o.skip = e.what();
      }
    }
    return o;
  });
  CheckRecord c;
  c.name = name;
  c.anchor = anchor;
  c.tolerance = tol;
  c.points = count;
  for (const auto& o : results) {
    if (!o.fail.empty()) {
      c.pass = false;
      if (c.reason.empty()) c.reason = o.fail;
      if (c.worst_point.empty()) c.worst_point = o.point;
      c.max_residual = std::numeric_limits<double>::infinity();
      continue;
    }
    if (!o.skip.empty()) {
      c.skipped = true;
      if (c.reason.empty()) c.reason = "sampling exhausted: " + o.skip;
      continue;
    }
    double r = std::isfinite(o.residual) ? o.residual : std::numeric_limits<double>::infinity();
    if (r > c.max_residual || c.worst_point.empty()) {
      c.max_residual = std::max(c.max_residual, r);
      if (r >= c.max_residual) c.worst_point = o.point;
    }
  }
  if (c.skipped && c.reason.rfind("sampling", 0) == 0) {
    c.max_residual = 0.0;
    c.worst_point.clear();
    return c;
  }
  if (!(c.max_residual <= tol)) c.pass = false;
  return c;
}

CheckRecord skipped(const std::string& name, const std::string& anchor, double tol, const std::string& why) {
  CheckRecord c;
  c.name = name;
  c.anchor = anchor;
  c.tolerance = tol;
  c.skipped = true;
  c.reason = why;
  return c;
}

}  // namespace

Report cli_verify(const RunConfig& cfg) {
  ResolvedModel m = resolve_model(cfg);
  const FFunction& F = m.F;
  const int n = m.n();
  auto tol = [&](const std::string& cls, double fallback) {
    auto it = cfg.tol.find(cls);
    if (it != cfg.tol.end()) return it->second;
    return fallback > 0.0 ? fallback : default_tolerances().at(cls);
  };
  const int N = cfg.points;
  Report rep;
  rep.model = m.id;
  rep.n = n;
  rep.seed = cfg.seed;
  rep.points = N;
  rep.exhaustive = cfg.exhaustive;
  for (int k = 1; k <= 3; ++k) rep.steps.push_back(default_step(k, 1.0, true));

  auto x_of = [n](const SamplePoint& p) { return embed_coordinates<double>(n, p.chart, p.q, 1.0); };
  const std::string no_chart = "no base chart for a single section";
  int idx = 0;

  rep.checks.push_back(run_check("polyharmonicity", "Laplace and mixed-partial conditions on F", tol("poly", 0), N,
                                 cfg.seed, idx++, n, [&](const SamplePoint& p) {
                                   return polyharmonicity_residual(F, x_of(p)).relative();
                                 }));
  rep.checks.push_back(run_check("swann homogeneity", "L3 F = 0 and L0 F = 2F", tol("swann", 0), N, cfg.seed, idx++, n,
                                 [&](const SamplePoint& p) {
                                   return swann_homogeneity_residual(F, x_of(p)).relative();
                                 }));
  rep.checks.push_back(run_check("monopole", "generalized abelian monopole equations", tol("monopole", 0), N, cfg.seed,
                                 idx++, n, [&](const SamplePoint& p) {
                                   return monopole_residual(F, x_of(p)).relative();
                                 }));
  rep.checks.push_back(run_check("hyperkahler closure", "closed hyperkahler 2-forms", tol("closure", 0), N, cfg.seed,
                                 idx++, n, [&](const SamplePoint& p) { return closure_residual(F, x_of(p)); }));

  const std::string qa = "fiber independence of V and U";
  if (n >= 1) {
    rep.checks.push_back(run_check("q-independence", qa, tol("qindep", 0), N, cfg.seed, idx++, n,
                                   [&](const SamplePoint& p) {
                                     BaseChart ch = BaseChart::from_coordinates(n, p.chart);
                                     ReduceOptions o;
                                     o.q_samples = {p.q};
                                     const auto& d = default_fiber_points();
                                     o.q_samples.insert(o.q_samples.end(), d.begin(), d.begin() + 4);
                                     o.compute_C = false;
                                     o.q_tol = std::numeric_limits<double>::infinity();
                                     ReducedData r = reduce(F, ch, o);
                                     return std::max(r.q_spread_V, r.q_spread_U);
                                   }));
  } else {
    rep.checks.push_back(skipped("q-independence", qa, tol("qindep", 0), no_chart));
    ++idx;
  }

  const std::string fa = "closed-form model tables";
  if (m.fixture) {
    double ftol = tol("fixture", m.fixture->tolerance);
    SweepReport s = regression_sweep(m.id, N, cfg.seed);
    CheckRecord c;
    c.name = "fixture regression";
    c.anchor = fa;
    c.points = N;
    c.tolerance = ftol;
    for (const auto& cmp : s.comparisons) {
      bool own = cmp.name == "q-independence" || cmp.name == "sigma part of A";
      double t = own ? cmp.tolerance : ftol;
      if (cmp.max_error > t) {
        c.pass = false;
        if (c.reason.empty()) c.reason = cmp.name + " above tolerance";
      }
      if (!own && (cmp.max_error > c.max_residual || c.worst_point.empty())) {
        c.max_residual = std::max(c.max_residual, cmp.max_error);
        if (cmp.max_error >= c.max_residual) c.worst_point = cmp.worst_point;
      }
    }
    for (const auto& f : s.failures)
      if (f.rfind("point", 0) == 0) {
        c.pass = false;
        if (c.reason.empty()) c.reason = f;
      }
    rep.checks.push_back(c);
  } else {
    rep.checks.push_back(skipped("fixture regression", fa, tol("fixture", 0), "user prepotential has no closed forms"));
  }
  ++idx;

  const std::string ba = "reduced Bogomol'nyi equation dC = F";
  const std::string va = "second-order constraints on V";
  const std::string ca = "hyperkahler cone reassembly";
  const std::string ja = "quaternion algebra of the almost complex structures";
  const std::string pa = "Calderbank-Pedersen form";
  if (n == 0) {
    rep.checks.push_back(skipped("bogomolnyi", ba, tol("bogomolnyi", 0), no_chart));
    rep.checks.push_back(skipped("v constraints", va, tol("vconstraints", 0), no_chart));
    rep.checks.push_back(skipped("cone reassembly", ca, tol("cone", 0), no_chart));
    rep.checks.push_back(skipped("almost complex", ja, tol("complex", 0), no_chart));
    rep.checks.push_back(skipped("calderbank-pedersen", pa, tol("cp", 0), no_chart));
    for (auto& c : rep.checks) rep.pass = rep.pass && c.pass;
    return rep;
  }

  rep.checks.push_back(run_check("bogomolnyi", ba, tol("bogomolnyi", n == 1 ? 1e-8 : 0), std::min(N, 50), cfg.seed,
                                 idx++, n, [&](const SamplePoint& p) {
                                   return bogomolnyi_residual(F, BaseChart::from_coordinates(n, p.chart));
                                 }));

  VFunction Vf = m.fixture ? m.fixture->V() : VFunction::from_model(F);
  rep.checks.push_back(run_check("v constraints", va, tol("vconstraints", 0), std::min(N, 50), cfg.seed, idx++, n,
                                 [&](const SamplePoint& p) {
                                   return constraint_residuals(Vf, p.chart, cfg.exhaustive).max();
                                 }));
  rep.checks.push_back(run_check("cone reassembly", ca, tol("cone", 0), std::min(N, 20), cfg.seed, idx++, n,
                                 [&](const SamplePoint& p) {
                                   return cone_reassembly_residual(F, BaseChart::from_coordinates(n, p.chart), p.q);
                                 }));
  if (n <= 2) {
    rep.checks.push_back(run_check("almost complex", ja, tol("complex", 0), std::min(N, n == 1 ? 10 : 5), cfg.seed,
                                   idx++, n, [&](const SamplePoint& p) {
                                     return almost_complex_check(F, BaseChart::from_coordinates(n, p.chart)).algebra;
                                   }));
  } else {
    rep.checks.push_back(skipped("almost complex", ja, tol("complex", 0), "only run for n <= 2"));
    ++idx;
  }
  if (n == 1) {
    rep.checks.push_back(run_check("calderbank-pedersen", pa, tol("cp", 0), std::min(N, 20), cfg.seed, idx++, n,
                                   [&](const SamplePoint& p) {
                                     BaseChart ch = BaseChart::from_coordinates(1, p.chart);
                                     ReducedData r = reduce(F, ch);
                                     QKConnection w = qk_connection(ch, r);
                                     Eigen::MatrixXd sg = qk_metric(ch, r, w);
                                     CPOutput cp = cp_assemble(Vf, p.chart);
                                     double d = (cp.metric - sg).cwiseAbs().maxCoeff();
                                     d = std::max(d, (cp.omega0 - w.omega0).cwiseAbs().maxCoeff());
                                     for (int i = 0; i < 3; ++i)
                                       d = std::max(d, (cp.omega[i] - w.omega[i]).cwiseAbs().maxCoeff());
                                     return std::max(d, cp_residual(Vf, p.chart));
                                   }));
  } else {
    rep.checks.push_back(skipped("calderbank-pedersen", pa, tol("cp", 0), "only defined for n = 1"));
  }
  for (auto& c : rep.checks) rep.pass = rep.pass && c.pass;
  return rep;
}

namespace {

json matrix_json(const Eigen::MatrixXd& M) {
  json a = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    std::vector<double> row(M.cols());
    for (int j = 0; j < M.cols(); ++j) row[j] = M(i, j);
    a.push_back(row);
  }
  return a;
}

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

json cli_eval_metric(const RunConfig& cfg, const std::vector<double>& chart, bool cp) {
  ResolvedModel m = resolve_model(cfg);
  const int n = m.n();
  if (n < 1) throw ConfigError("eval-metric needs a model with a base chart (n >= 1)");
  if (static_cast<int>(chart.size()) != 3 * n - 1)
    throw ConfigError("expected " + std::to_string(3 * n - 1) + " chart coordinates, got " +
                      std::to_string(chart.size()));
  BaseChart ch = BaseChart::from_coordinates(n, chart);
  if (ch.rho[1] == 0.0) throw DomainError("rho1 = 0: frame is degenerate");
  ReducedData r = reduce(m.F, ch);
  if (r.V == 0.0) throw DegeneratePointError("V = 0");
  QKConnection w = qk_connection(ch, r);
  Eigen::MatrixXd sg = qk_metric(ch, r, w);
  json B = json::array(), C = json::array();
  for (const auto& b : r.B) B.push_back(std::vector<double>{b[0], b[1], b[2]});
  for (const auto& c : r.C) C.push_back(vec(c));
  json out{{"model", m.id},
           {"n", n},
           {"coordinates", chart_variable_names(n)},
           {"chart", chart},
           {"V", r.V},
           {"dV", vec(r.dV)},
           {"U", matrix_json(r.U)},
           {"B", B},
           {"C", C},
           {"omega0", vec(w.omega0)},
           {"omega", {vec(w.omega[0]), vec(w.omega[1]), vec(w.omega[2])}},
           {"sg", matrix_json(sg)}};
  if (cp) {
    if (n != 1) throw ConfigError("--cp is only defined for n = 1");
    VFunction Vf = m.fixture ? m.fixture->V() : VFunction::from_model(m.F);
    CPOutput c = cp_assemble(Vf, chart);
    double d = (c.metric - sg).cwiseAbs().maxCoeff();
    d = std::max(d, (c.omega0 - w.omega0).cwiseAbs().maxCoeff());
    for (int i = 0; i < 3; ++i) d = std::max(d, (c.omega[i] - w.omega[i]).cwiseAbs().maxCoeff());
    out["cp"] = {{"metric", matrix_json(c.metric)},
                 {"omega0", vec(c.omega0)},
                 {"omega", {vec(c.omega[0]), vec(c.omega[1]), vec(c.omega[2])}},
                 {"max_difference", d}};
  }
  return out;
}

std::string format_report(const Report& r) {
  std::ostringstream os;
  os << "model " << r.model << " (n = " << r.n << "), seed " << r.seed << ", points " << r.points
     << (r.exhaustive ? ", exhaustive" : "") << ", version " << r.version << "\n";
  char buf[256];
  for (const auto& c : r.checks) {
    const char* status = !c.pass ? "FAIL" : c.skipped ? "SKIP" : "PASS";
    std::snprintf(buf, sizeof buf, "%-4s  %-20s  max %-11.3e tol %-9.1e pts %-4d", status, c.name.c_str(),
                  c.max_residual, c.tolerance, c.points);
    os << buf;
    if (!c.reason.empty()) os << "  " << c.reason;
    os << "\n";
  }
  os << (r.pass ? "overall PASS" : "overall FAIL") << "\n";
  return os.str();
}

}  // namespace qkforge
