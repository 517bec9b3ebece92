// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include "qkforge/harness.hpp"

using namespace qkforge;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void line(int id, bool pass, const std::string& what) {
  std::printf("%s %2d  %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

const CheckRecord& find(const Report& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  throw std::runtime_error("no check named " + name);
}

// a check counts only if it ran and met its tolerance
bool ran_and_passed(const CheckRecord& c) { return c.pass && !c.skipped; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Report verify(const std::string& model, int points, bool exhaustive = false) {
  RunConfig c;
  c.model = model;
  c.points = points;
  c.seed = 7;
  c.exhaustive = exhaustive;
  return cli_verify(c);
}

}  // namespace

int main() {
  const std::vector<std::string> cmap{"x1sq", "x1x2", "x2cubed-over-x1"};

  // 1-3: fixture regression with runtime targets
  struct Fx {
    int id;
    std::string model;
    int points;
    double budget;
  };
  for (const Fx& f : {Fx{1, "x1sq", 100, 30}, Fx{2, "x1x2", 100, 60}, Fx{3, "x2cubed-over-x1", 50, 120}}) {
    auto t0 = Clock::now();
    SweepReport s = regression_sweep(f.model, f.points, 7);
    double dt = seconds_since(t0);
    double worst = 0.0;
    for (const auto& c : s.comparisons) worst = std::max(worst, c.max_error / c.tolerance);
    line(f.id, s.pass() && dt < f.budget,
         "fixture regression " + f.model + ", " + std::to_string(f.points) + " points, worst error/tol " +
             fmt("%.2e", worst) + ", " + fmt("%.2f s", dt));
  }

  // 4: toy model is flat
  {
    double worst = 0.0;
    for (const auto& p : sample_points(0, 100, 7)) worst = std::max(worst, toy_flat_residual(p.q));
    line(4, worst < 1e-8, "toy model flat metric, 100 points, max " + fmt("%.2e", worst));
  }

  std::map<std::string, Report> rep;
  for (const auto& m : {"x1sq", "x1x2", "x2cubed-over-x1", "toy-log"}) rep[m] = verify(m, 100);

  // 5: monopole equations plus a control that must fail
  {
    bool ok = true;
    double worst = 0.0;
    for (auto& [m, r] : rep) {
      const auto& c = find(r, "monopole");
      ok = ok && ran_and_passed(c);
      worst = std::max(worst, c.max_residual);
    }
    FFunction bad = FFunction::custom(1, "x0^2 x1", [](auto x) { return x[2] * x[2] * x[5]; });
    double control = 0.0;
    for (const auto& p : sample_points(1, 10, 7))
      control = std::max(control, monopole_residual(bad, embed_coordinates<double>(1, p.chart, p.q, 1.0)).relative());
    line(5, ok && control > 1e-4,
         "monopole equations, all models, max " + fmt("%.2e", worst) + "; control residual " + fmt("%.2e", control));
  }

  // 6: polyharmonicity and Swann conditions
  {
    bool ok = true;
    double worst = 0.0;
    for (auto& [m, r] : rep)
      for (const char* n : {"polyharmonicity", "swann homogeneity"}) {
        ok = ok && ran_and_passed(find(r, n));
        worst = std::max(worst, find(r, n).max_residual);
      }
    line(6, ok, "polyharmonicity and Swann conditions, all models, max " + fmt("%.2e", worst));
  }

  // 7: fiber independence (the toy model has no base chart to reduce to)
  {
    bool ok = true;
    double worst = 0.0;
    for (const auto& m : cmap) {
      const auto& c = find(rep[m], "q-independence");
      ok = ok && ran_and_passed(c);
      worst = std::max(worst, c.max_residual);
    }
    line(7, ok, "q-independence of V and U at 5 fiber points, c-map models, max " + fmt("%.2e", worst));
  }

  // 8: reduced Bogomol'nyi equation
  {
    const auto& a = find(rep["x1sq"], "bogomolnyi");
    const auto& b = find(rep["x1x2"], "bogomolnyi");
    const auto& c = find(rep["x2cubed-over-x1"], "bogomolnyi");
    bool ok = ran_and_passed(a) && a.tolerance <= 1e-8 && ran_and_passed(b) && ran_and_passed(c);
    line(8, ok,
         "Bogomol'nyi dC = F: x1sq " + fmt("%.2e", a.max_residual) + ", x1x2 " + fmt("%.2e", b.max_residual) +
             ", x2cubed-over-x1 " + fmt("%.2e", c.max_residual));
  }

  // 9: V constraints, independent subset and full set, plus a generic cubic
  {
    bool ok = true;
    double worst = 0.0;
    for (const auto& m : cmap) {
      const auto& c = find(rep[m], "v constraints");
      Report ex = verify(m, 50, true);
      const auto& e = find(ex, "v constraints");
      ok = ok && ran_and_passed(c) && ran_and_passed(e);
      worst = std::max({worst, c.max_residual, e.max_residual});
    }
    auto cubic = VFunction::from_expression("rho1^2*rho2", 2);
    double control = 0.0;
    for (const auto& p : sample_points(2, 10, 7)) control = std::max(control, constraint_residuals(cubic, p.chart).max());
    line(9, ok && control > 1e-5,
         "V constraints (subset and exhaustive), max " + fmt("%.2e", worst) + "; cubic control " + fmt("%.2e", control));
  }

  // 10: cone reassembly
  {
    bool ok = true;
    double worst = 0.0;
    for (const auto& m : cmap) {
      const auto& c = find(rep[m], "cone reassembly");
      ok = ok && ran_and_passed(c);
      worst = std::max(worst, c.max_residual);
    }
    line(10, ok, "hyperkahler cone reassembly, 20 points per model, max " + fmt("%.2e", worst));
  }

  // 11: Calderbank-Pedersen agreement and eigen-equation
  {
    const auto& c = find(rep["x1sq"], "calderbank-pedersen");
    auto V = VFunction::from_expression("2*rho1^2", 1);
    double eig = 0.0;
    for (const auto& p : sample_points(1, 20, 7)) eig = std::max(eig, cp_residual(V, p.chart));
    line(11, ran_and_passed(c) && c.tolerance <= 1e-8 && eig < 1e-8,
         "Calderbank-Pedersen vs general formulas " + fmt("%.2e", c.max_residual) + ", eigen-equation " +
             fmt("%.2e", eig));
  }

  // 12: almost complex structures
  {
    const auto& a = find(rep["x1sq"], "almost complex");
    const auto& b = find(rep["x1x2"], "almost complex");
    line(12, ran_and_passed(a) && ran_and_passed(b) && a.points == 10 && b.points == 5,
         "quaternion algebra of J: x1sq " + fmt("%.2e", a.max_residual) + ", x1x2 " + fmt("%.2e", b.max_residual));
  }

  // 13: determinism
  {
    bool same = true;
    for (const auto& m : {"x1sq", "x2cubed-over-x1"}) same = same && serialize(verify(m, 100)) == serialize(rep[m]);
    line(13, same, "identical seeds give byte-identical JSON reports");
  }

  std::printf("%s\n", failures ? "acceptance: FAILED" : "acceptance: all criteria pass");
  return failures ? 1 : 0;
}
