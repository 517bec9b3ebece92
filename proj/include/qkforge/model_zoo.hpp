#pragma once

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qkforge/expression.hpp"
#include "qkforge/quaternion.hpp"
#include "qkforge/swann.hpp"
#include "qkforge/twistor.hpp"
#include "qkforge/v_constraints.hpp"

namespace qkforge {

struct UnknownModelError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SamplePoint {
  std::vector<double> chart;  // 3n-1 free coordinates (empty for the toy model)
  Quaternion q;
};

// Built-in model with closed forms over the chart coordinates.
struct ModelFixture {
  std::string id;
  std::string prepotential;  // empty for the toy model
  int n = 0;
  std::string geometry;
  std::string expected_V;
  std::vector<std::vector<std::string>> expected_U;  // (n+1) x (n+1)
  std::vector<std::array<std::string, 3>> expected_B;
  std::vector<std::vector<std::string>> expected_C;  // per K, over the chart coordinates
  double tolerance = 1e-6;                            // fixture comparisons, relative

  bool is_toy() const { return prepotential.empty(); }
  FFunction F() const;
  VFunction V() const;

  double eval(const std::string& expr, std::span<const double> c) const;
  double V_at(std::span<const double> c) const { return eval(expected_V, c); }
  Eigen::MatrixXd U_at(std::span<const double> c) const;
  std::vector<ImVector> B_at(std::span<const double> c) const;
  std::vector<Eigen::VectorXd> C_at(std::span<const double> c) const;

  SamplePoint sample(std::mt19937_64& rng) const;
};

const std::vector<std::string>& fixture_ids();
const ModelFixture& fixture(const std::string& id);

// Uniform chart point in the model box and q with |q| in [0.5, 2], both
// away from the configurations where the reduction is singular.
SamplePoint sample_point(int n, std::mt19937_64& rng);
std::vector<SamplePoint> sample_points(int n, int count, unsigned long seed);

struct Comparison {
  std::string name;
  int points = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::vector<double> worst_point;
  bool pass() const { return max_error <= tolerance; }
};

struct SweepReport {
  std::string id;
  int points = 0;
  unsigned long seed = 0;
  std::vector<Comparison> comparisons;
  std::vector<std::string> failures;
  bool pass() const { return failures.empty(); }
};

SweepReport regression_sweep(const std::string& id, int num_points, unsigned long seed);

// Worker count for point sweeps: QKFORGE_THREADS if set, else the hardware.
int sweep_threads();

// Runs f(i) for i in [0, count) on sweep_threads() workers; results in order.
template <class R, class Fn>
std::vector<R> parallel_map(int count, Fn f);

}  // namespace qkforge

#include <thread>

namespace qkforge {

template <class R, class Fn>
std::vector<R> parallel_map(int count, Fn f) {
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
  int workers = std::max(1, std::min(sweep_threads(), count));
  auto run = [&](int w) {
    for (int i = w; i < count; i += workers) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace qkforge
