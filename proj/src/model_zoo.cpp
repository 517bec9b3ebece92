#include "qkforge/model_zoo.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>

namespace qkforge {

namespace {

std::vector<ModelFixture> make_fixtures() {
  std::vector<ModelFixture> fx;

  ModelFixture a;
  a.id = "x1sq";
  a.prepotential = "X1^2";
  a.n = 1;
  a.geometry = "SU(2,1)/S(U(2)xU(1))";
  a.expected_V = "2*rho1^2";
  a.expected_U = {{"2*eta1^2 - rho1^2", "-2*eta1"}, {"-2*eta1", "2"}};
  a.expected_B = {{{"0", "-4*eta1*rho1", "-2*rho1^2"}}, {{"0", "4*rho1", "0"}}};
  a.expected_C = {{"0", "0"}, {"0", "0"}};
  fx.push_back(a);

  ModelFixture b;
  b.id = "x1x2";
  b.prepotential = "X1*X2";
  b.n = 2;
  b.geometry = "SU(2,2)/S(U(2)xU(2))";
  b.expected_V = "2*rho1*rho2";
  b.expected_U = {{"2*eta1*eta2 - rho1*rho2", "-eta2", "-eta1"}, {"-eta2", "0", "1"}, {"-eta1", "1", "0"}};
  b.expected_B = {{{"-2*eta1*chi2", "-2*(eta1*rho2 + rho1*eta2)", "-2*rho1*rho2"}},
                  {{"2*chi2", "2*rho2", "0"}},
                  {{"0", "2*rho1", "0"}}};
  // columns: chi2, rho1, rho2, eta1, eta2
  b.expected_C = {{"-rho1/2", "chi2/2", "0", "0", "0"}, {"0", "0", "0", "0", "0"}, {"0", "0", "0", "0", "0"}};
  fx.push_back(b);

  ModelFixture c;
  c.id = "x2cubed-over-x1";
  c.prepotential = "X2^3/X1";
  c.n = 2;
  c.geometry = "G2(2)/SO(4)";
  c.tolerance = 1e-5;
  c.expected_V = "2*rho2*(rho2^2 + 3*chi2^2)/rho1";
  const std::string u00 =
      "2*eta1^2*rho2*(rho2^2 - 3*chi2^2)/rho1^3 - 6*eta1*eta2*(rho2^2 - chi2^2)/rho1^2"
      " + rho2*(6*eta2^2 - rho2^2 - 3*chi2^2)/rho1";
  const std::string u11 = "2*rho2*(rho2^2 - 3*chi2^2)/rho1^3";
  const std::string u22 = "6*rho2/rho1";
  const std::string u01 = "-2*eta1*rho2*(rho2^2 - 3*chi2^2)/rho1^3 + 3*eta2*(rho2^2 - chi2^2)/rho1^2";
  const std::string u02 = "3*eta1*(rho2^2 - chi2^2)/rho1^2 - 6*eta2*rho2/rho1";
  const std::string u12 = "-3*(rho2^2 - chi2^2)/rho1^2";
  c.expected_U = {{u00, u01, u02}, {u01, u11, u12}, {u02, u12, u22}};
  c.expected_B = {
      {{"6*eta1*chi2*(rho2^2 - chi2^2)/rho1^2 - 12*eta2*rho2*chi2/rho1",
        "2*eta1*rho2*(rho2^2 + 3*chi2^2)/rho1^2 - 6*eta2*(rho2^2 + chi2^2)/rho1", "-2*rho2*(rho2^2 + 3*chi2^2)/rho1"}},
      {{"-6*chi2*(rho2^2 - chi2^2)/rho1^2", "-2*rho2*(rho2^2 + 3*chi2^2)/rho1^2", "0"}},
      {{"12*rho2*chi2/rho1", "6*(rho2^2 + chi2^2)/rho1", "0"}}};
  c.expected_C = {
      {"-3/(2*rho1^3)*(rho1^2*chi2^2 + rho1^2*rho2^2 - 2*rho1^2*eta2^2 + 2*eta1^2*chi2^2 - 2*eta1^2*rho2^2"
       " + 4*rho1*eta1*rho2*eta2)",
       "3*chi2/(2*rho1^4)*(rho1^2*chi2^2 - rho1^2*rho2^2 - 2*rho1^2*eta2^2 + 2*eta1^2*chi2^2 - 6*eta1^2*rho2^2"
       " + 8*rho1*eta1*rho2*eta2)",
       "3*chi2/rho1^3*(rho1^2*rho2 + 2*eta1^2*rho2 - 2*rho1*eta1*eta2)", "0", "0"},
      {"6/rho1^3*(eta1*chi2^2 - eta1*rho2^2 + rho1*rho2*eta2)",
       "-6*chi2/rho1^4*(eta1*chi2^2 - 3*eta1*rho2^2 + 2*rho1*rho2*eta2)",
       "-6*chi2/rho1^3*(2*eta1*rho2 - rho1*eta2)", "0", "0"},
      {"6/rho1^2*(eta1*rho2 - rho1*eta2)", "-6*chi2/rho1^3*(2*eta1*rho2 - rho1*eta2)", "6*chi2/rho1^2*eta1", "0",
       "0"}};
  fx.push_back(c);

  ModelFixture t;
  t.id = "toy-log";
  t.n = 0;
  t.geometry = "flat R^4";
  t.tolerance = 1e-8;
  fx.push_back(t);
  return fx;
}

const std::vector<ModelFixture>& fixtures() {
  static const std::vector<ModelFixture> fx = make_fixtures();
  return fx;
}

}  // namespace

const std::vector<std::string>& fixture_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& f : fixtures()) v.push_back(f.id);
    return v;
  }();
  return ids;
}

const ModelFixture& fixture(const std::string& id) {
  for (const auto& f : fixtures())
    if (f.id == id) return f;
  throw UnknownModelError("unknown model '" + id + "'");
}

FFunction ModelFixture::F() const {
  if (is_toy()) return FFunction::toy_log();
  return FFunction::cmap(Prepotential::from_expression(prepotential, n), id);
}

VFunction ModelFixture::V() const {
  if (is_toy()) throw std::invalid_argument("toy model has no base chart");
  return VFunction::from_expression(expected_V, n);
}

double ModelFixture::eval(const std::string& expr, std::span<const double> c) const {
  // parsed once per distinct string
  static std::mutex mu;
  static std::map<std::pair<int, std::string>, Expression> cache;
  const Expression* e;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, expr);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, Expression::parse(expr, chart_variable_names(n))).first;
    e = &it->second;
  }
  return e->eval<double>(c);
}

Eigen::MatrixXd ModelFixture::U_at(std::span<const double> c) const {
  Eigen::MatrixXd U(n + 1, n + 1);
  for (int I = 0; I <= n; ++I)
    for (int J = 0; J <= n; ++J) U(I, J) = eval(expected_U[I][J], c);
  return U;
}

std::vector<ImVector> ModelFixture::B_at(std::span<const double> c) const {
  std::vector<ImVector> B;
  for (const auto& b : expected_B) B.emplace_back(eval(b[0], c), eval(b[1], c), eval(b[2], c));
  return B;
}

std::vector<Eigen::VectorXd> ModelFixture::C_at(std::span<const double> c) const {
  std::vector<Eigen::VectorXd> C;
  for (const auto& row : expected_C) {
    Eigen::VectorXd v(row.size());
    for (size_t a = 0; a < row.size(); ++a) v[a] = eval(row[a], c);
    C.push_back(v);
  }
  return C;
}

SamplePoint ModelFixture::sample(std::mt19937_64& rng) const { return sample_point(n, rng); }

SamplePoint sample_point(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> wide(-2.0, 2.0), pos(0.2, 3.0), norm(0.5, 2.0);
  std::normal_distribution<double> gauss;
  SamplePoint p;
  if (n >= 1) {
    p.chart.resize(3 * n - 1);
    for (int I = 2; I <= n; ++I) p.chart[chi_index(n, I)] = wide(rng);
    for (int I = 1; I <= n; ++I) p.chart[rho_index(n, I)] = pos(rng);
    for (int I = 1; I <= n; ++I) p.chart[eta_index(n, I)] = wide(rng);
  }
  // reject fibers where q k conj(q) is close to the k axis
  for (;;) {
    Quaternion q{gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
    double r2 = norm2(q);
    if (r2 < 1e-6) continue;
    double axis = (q.w * q.w + q.z * q.z - q.x * q.x - q.y * q.y) / r2;
    if (std::abs(axis) > 0.95) continue;
    double s = norm(rng) / std::sqrt(r2);
    p.q = s * q;
    return p;
  }
}

std::vector<SamplePoint> sample_points(int n, int count, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::vector<SamplePoint> pts;
  for (int i = 0; i < count; ++i) pts.push_back(sample_point(n, rng));
  return pts;
}

int sweep_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("QKFORGE_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return hw;
}

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

struct PointErrors {
  std::map<std::string, double> err;
  void put(const std::string& k, double v) {
    auto& e = err[k];
    e = std::max(e, std::isfinite(v) ? v : std::numeric_limits<double>::infinity());
  }
};

std::vector<double> flatten(const SamplePoint& p) {
  std::vector<double> v(p.chart);
  v.insert(v.end(), {p.q.w, p.q.x, p.q.y, p.q.z});
  return v;
}

PointErrors compare_point(const ModelFixture& fx, const FFunction& F, const SamplePoint& p) {
  PointErrors e;
  if (fx.is_toy()) {
    e.put("flat metric", toy_flat_residual(p.q));
    return e;
  }
  const int n = fx.n;
  BaseChart chart = BaseChart::from_coordinates(n, p.chart);
  ReduceOptions opt;
  opt.q_samples = {p.q};
  const auto& d = default_fiber_points();
  opt.q_samples.insert(opt.q_samples.end(), d.begin(), d.begin() + 4);
  opt.q_tol = std::numeric_limits<double>::infinity();
  opt.sigma_tol = std::numeric_limits<double>::infinity();
  ReducedData r = reduce(F, chart, opt);

  double V = fx.V_at(p.chart);
  e.put("V", rel(r.V, V));
  Eigen::MatrixXd U = fx.U_at(p.chart);
  for (int I = 0; I <= n; ++I)
    for (int J = I; J <= n; ++J) e.put("U" + std::to_string(I) + std::to_string(J), rel(r.U(I, J), U(I, J)));
  auto B = fx.B_at(p.chart);
  for (int K = 0; K <= n; ++K)
    for (int i = 0; i < 3; ++i) e.put("B" + std::to_string(K) + "_" + std::to_string(i + 1), rel(r.B[K][i], B[K][i]));
  auto C = fx.C_at(p.chart);
  for (int K = 0; K <= n; ++K)
    for (int a = 0; a < chart.num_coordinates(); ++a) e.put("C" + std::to_string(K), rel(r.C[K][a], C[K][a]));
  e.put("q-independence", std::max(r.q_spread_V, r.q_spread_U));
  e.put("sigma part of A", r.sigma_residual);

  // the transcription itself: 2 U_JK chi^J . chi^K = V
  double s = 0.0;
  for (int I = 0; I <= n; ++I)
    for (int J = 0; J <= n; ++J) s += 2.0 * U(I, J) * chart.chi_vec(I).dot(chart.chi_vec(J));
  e.put("fixture V identity", rel(s, V));
  return e;
}

}  // namespace

SweepReport regression_sweep(const std::string& id, int num_points, unsigned long seed) {
  const ModelFixture& fx = fixture(id);
  if (num_points < 1) throw std::invalid_argument("regression_sweep: num_points must be >= 1");
  FFunction F = fx.F();
  auto pts = sample_points(fx.n, num_points, seed);
  struct Outcome {
    PointErrors e;
    std::string error;
  };
  auto results = parallel_map<Outcome>(num_points, [&](int i) {
    Outcome o;
    try {
      o.e = compare_point(fx, F, pts[i]);
    } catch (const std::exception& ex) {
      o.error = ex.what();
    }
    return o;
  });

  SweepReport rep;
  rep.id = id;
  rep.points = num_points;
  rep.seed = seed;
  std::map<std::string, Comparison> by_name;
  std::vector<std::string> order;
  for (int i = 0; i < num_points; ++i) {
    if (!results[i].error.empty()) {
      rep.failures.push_back("point " + std::to_string(i) + ": " + results[i].error);
      continue;
    }
    for (const auto& [name, v] : results[i].e.err) {
      auto it = by_name.find(name);
      if (it == by_name.end()) {
        Comparison c;
        c.name = name;
        c.tolerance = name == "q-independence" ? 1e-8 : name == "sigma part of A" ? 1e-6 : fx.tolerance;
        it = by_name.emplace(name, c).first;
        order.push_back(name);
      }
      Comparison& c = it->second;
      ++c.points;
      if (v > c.max_error || c.worst_point.empty()) {
        c.max_error = std::max(c.max_error, v);
        if (v >= c.max_error) c.worst_point = flatten(pts[i]);
      }
    }
  }
  for (const auto& name : order) {
    const Comparison& c = by_name[name];
    rep.comparisons.push_back(c);
    if (!c.pass())
      rep.failures.push_back(name + ": max error " + std::to_string(c.max_error) + " > " + std::to_string(c.tolerance));
  }
  return rep;
}

}  // namespace qkforge
