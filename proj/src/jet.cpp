#include "qkforge/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace qkforge {

namespace {

struct Mono {
  int deg;
  std::array<int, 3> v;
};

}  // namespace

JetSpace::JetSpace(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1 || order < 1 || order > 3) throw std::invalid_argument("JetSpace: need dim >= 1 and 1 <= order <= 3");
  std::vector<Mono> monos;
  monos.push_back({0, {0, 0, 0}});
  idx1_.assign(dim, -1);
  for (int i = 0; i < dim; ++i) {
    idx1_[i] = static_cast<int>(monos.size());
    monos.push_back({1, {i, 0, 0}});
  }
  if (order >= 2) {
    idx2_.assign(dim * dim, -1);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        idx2_[i * dim + j] = static_cast<int>(monos.size());
        monos.push_back({2, {i, j, 0}});
      }
  }
  if (order >= 3) {
    idx3_.assign(dim * dim * dim, -1);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j)
        for (int k = j; k < dim; ++k) {
          idx3_[(i * dim + j) * dim + k] = static_cast<int>(monos.size());
          monos.push_back({3, {i, j, k}});
        }
  }
  size_ = static_cast<int>(monos.size());

  auto lookup = [&](std::array<int, 3> v, int deg) -> int {
    std::sort(v.begin(), v.begin() + deg);
    switch (deg) {
      case 0: return 0;
      case 1: return index(v[0]);
      case 2: return index(v[0], v[1]);
      default: return index(v[0], v[1], v[2]);
    }
  };
  for (int a = 0; a < size_; ++a)
    for (int b = 0; b < size_; ++b) {
      int deg = monos[a].deg + monos[b].deg;
      if (deg > order) continue;
      std::array<int, 3> v{0, 0, 0};
      int p = 0;
      for (int t = 0; t < monos[a].deg; ++t) v[p++] = monos[a].v[t];
      for (int t = 0; t < monos[b].deg; ++t) v[p++] = monos[b].v[t];
      Term term{a, b, lookup(v, deg)};
      products_.push_back(term);
      if (monos[a].deg > 0 && monos[b].deg > 0) nc_products_.push_back(term);
    }
}

std::shared_ptr<const JetSpace> JetSpace::make(int dim, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{dim, order}];
  if (!slot) slot = std::shared_ptr<const JetSpace>(new JetSpace(dim, order));
  return slot;
}

int JetSpace::index(int i) const { return idx1_.at(i); }

int JetSpace::index(int i, int j) const {
  if (order_ < 2) throw std::out_of_range("JetSpace: order too low");
  if (i > j) std::swap(i, j);
  return idx2_.at(i * dim_ + j);
}

int JetSpace::index(int i, int j, int k) const {
  if (order_ < 3) throw std::out_of_range("JetSpace: order too low");
  std::array<int, 3> v{i, j, k};
  std::sort(v.begin(), v.end());
  return idx3_.at((v[0] * dim_ + v[1]) * dim_ + v[2]);
}

Jet::Jet(JetSpacePtr s, double v) : s_(std::move(s)), c_(s_ ? s_->size() : 1, 0.0) { c_[0] = v; }

Jet Jet::variable(const JetSpacePtr& s, int i, double v) {
  Jet r(s, v);
  r.c_[s->index(i)] = 1.0;
  return r;
}

Jet Jet::linear(const JetSpacePtr& s, double v, std::span<const double> grad) {
  Jet r(s, v);
  for (int i = 0; i < s->dim(); ++i) r.c_[s->index(i)] = grad[i];
  return r;
}

double Jet::d(int i) const { return s_ ? c_[s_->index(i)] : 0.0; }

double Jet::d(int i, int j) const {
  if (!s_) return 0.0;
  return c_[s_->index(i, j)] * (i == j ? 2.0 : 1.0);
}

double Jet::d(int i, int j, int k) const {
  if (!s_) return 0.0;
  double m = 1.0;
  if (i == j && j == k) m = 6.0;
  else if (i == j || j == k || i == k) m = 2.0;
  return c_[s_->index(i, j, k)] * m;
}

void Jet::adopt(const JetSpacePtr& s) {
  if (s_ == s || !s) return;
  if (s_) throw std::logic_error("Jet: mixing jets from different spaces");
  double v = c_[0];
  s_ = s;
  c_.assign(s_->size(), 0.0);
  c_[0] = v;
}

Jet& Jet::operator+=(const Jet& o) {
  adopt(o.s_);
  if (!o.s_) {
    c_[0] += o.c_[0];
    return *this;
  }
  for (size_t t = 0; t < c_.size(); ++t) c_[t] += o.c_[t];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  adopt(o.s_);
  if (!o.s_) {
    c_[0] -= o.c_[0];
    return *this;
  }
  for (size_t t = 0; t < c_.size(); ++t) c_[t] -= o.c_[t];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  if (!o.s_) {
    for (double& x : c_) x *= o.c_[0];
    return *this;
  }
  if (!s_) {
    double v = c_[0];
    *this = o;
    for (double& x : c_) x *= v;
    return *this;
  }
  if (s_ != o.s_) throw std::logic_error("Jet: mixing jets from different spaces");
  std::vector<double> out(c_.size(), 0.0);
  for (const auto& t : s_->products()) out[t.c] += c_[t.a] * o.c_[t.b];
  c_.swap(out);
  return *this;
}

Jet& Jet::operator/=(const Jet& o) {
  if (!o.s_) {
    for (double& x : c_) x /= o.c_[0];
    return *this;
  }
  double v = o.value();
  return *this *= o.compose(1.0 / v, -1.0 / (v * v), 1.0 / (v * v * v), -1.0 / (v * v * v * v));
}

Jet Jet::operator-() const {
  Jet r(*this);
  for (double& x : r.c_) x = -x;
  return r;
}

Jet Jet::compose(double f0, double f1, double f2, double f3) const {
  Jet r(*this);
  if (!s_) {
    r.c_[0] = f0;
    return r;
  }
  // r = f0 + f1 d + f2 d^2 + f3 d^3 with d = this - value
  std::vector<double> d(c_);
  d[0] = 0.0;
  for (size_t t = 0; t < c_.size(); ++t) r.c_[t] = f1 * d[t];
  r.c_[0] = f0;
  if (s_->order() >= 2) {
    std::vector<double> d2(c_.size(), 0.0);
    for (const auto& t : s_->nonconstant_products()) d2[t.c] += d[t.a] * d[t.b];
    for (size_t t = 0; t < c_.size(); ++t) r.c_[t] += f2 * d2[t];
    if (s_->order() >= 3) {
      std::vector<double> d3(c_.size(), 0.0);
      for (const auto& t : s_->nonconstant_products()) d3[t.c] += d2[t.a] * d[t.b];
      for (size_t t = 0; t < c_.size(); ++t) r.c_[t] += f3 * d3[t];
    }
  }
  return r;
}

Jet sqrt(const Jet& a) {
  double v = a.value();
  double s = std::sqrt(v);
  return a.compose(s, 0.5 / s, -0.125 / (s * v), 0.0625 / (s * v * v));
}

Jet exp(const Jet& a) {
  double e = std::exp(a.value());
  return a.compose(e, e, e / 2.0, e / 6.0);
}

Jet log(const Jet& a) {
  double v = a.value();
  return a.compose(std::log(v), 1.0 / v, -0.5 / (v * v), 1.0 / (3.0 * v * v * v));
}

Jet sin(const Jet& a) {
  double s = std::sin(a.value()), c = std::cos(a.value());
  return a.compose(s, c, -s / 2.0, -c / 6.0);
}

Jet cos(const Jet& a) {
  double s = std::sin(a.value()), c = std::cos(a.value());
  return a.compose(c, -s, -c / 2.0, s / 6.0);
}

Jet atan(const Jet& a) {
  double v = a.value();
  double w = 1.0 + v * v;
  return a.compose(std::atan(v), 1.0 / w, -v / (w * w), (6.0 * v * v - 2.0) / (6.0 * w * w * w));
}

Jet atanh(const Jet& a) {
  double v = a.value();
  double w = 1.0 - v * v;
  return a.compose(std::atanh(v), 1.0 / w, v / (w * w), (2.0 + 6.0 * v * v) / (6.0 * w * w * w));
}

Jet pow(const Jet& a, double p) {
  double v = a.value();
  return a.compose(std::pow(v, p), p * std::pow(v, p - 1.0), p * (p - 1.0) * std::pow(v, p - 2.0) / 2.0,
                   p * (p - 1.0) * (p - 2.0) * std::pow(v, p - 3.0) / 6.0);
}

Jet atan2(const Jet& y, const Jet& x) {
  double y0 = y.value(), x0 = x.value();
  // rotate to the base direction so the remaining angle is a small atan
  Jet u = (x0 * y - y0 * x) / (x0 * x + y0 * y);
  return std::atan2(y0, x0) + atan(u);
}

}  // namespace qkforge
