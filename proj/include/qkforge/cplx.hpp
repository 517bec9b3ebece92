#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

#include "qkforge/jet.hpp"

namespace qkforge {

// Complex numbers over an arbitrary real scalar (double or Jet).
// std::complex is only specified for floating point types.
template <class T>
struct Cplx {
  T re, im;

  Cplx() : re(0.0), im(0.0) {}
  Cplx(T r) : re(std::move(r)), im(0.0) {}
  Cplx(T r, T i) : re(std::move(r)), im(std::move(i)) {}
  Cplx(double r) requires(!std::is_same_v<T, double>) : re(r), im(0.0) {}

  Cplx& operator+=(const Cplx& o) { re += o.re; im += o.im; return *this; }
  Cplx& operator-=(const Cplx& o) { re -= o.re; im -= o.im; return *this; }
  Cplx& operator*=(const Cplx& o) {
    T r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = r;
    return *this;
  }
  Cplx& operator/=(const Cplx& o) {
    T den = o.re * o.re + o.im * o.im;
    T r = (re * o.re + im * o.im) / den;
    im = (im * o.re - re * o.im) / den;
    re = r;
    return *this;
  }
  Cplx operator-() const { return Cplx(-re, -im); }
};

template <class T> Cplx<T> operator+(Cplx<T> a, const Cplx<T>& b) { return a += b; }
template <class T> Cplx<T> operator-(Cplx<T> a, const Cplx<T>& b) { return a -= b; }
template <class T> Cplx<T> operator*(Cplx<T> a, const Cplx<T>& b) { return a *= b; }
template <class T> Cplx<T> operator/(Cplx<T> a, const Cplx<T>& b) { return a /= b; }

template <class T> Cplx<T> operator*(const T& s, Cplx<T> a) { a.re *= s; a.im *= s; return a; }
template <class T> Cplx<T> operator*(Cplx<T> a, const T& s) { a.re *= s; a.im *= s; return a; }
template <class T> Cplx<T> operator*(double s, Cplx<T> a) requires(!std::is_same_v<T, double>) {
  a.re *= s; a.im *= s; return a;
}
template <class T> Cplx<T> operator/(Cplx<T> a, const T& s) { a.re /= s; a.im /= s; return a; }
template <class T> Cplx<T> operator+(Cplx<T> a, const T& s) { a.re += s; return a; }
template <class T> Cplx<T> operator+(const T& s, Cplx<T> a) { a.re += s; return a; }
template <class T> Cplx<T> operator-(Cplx<T> a, const T& s) { a.re -= s; return a; }

template <class T> Cplx<T> conj(const Cplx<T>& a) { return Cplx<T>(a.re, -a.im); }
template <class T> T norm2(const Cplx<T>& a) { return a.re * a.re + a.im * a.im; }

template <class T>
Cplx<T> exp(const Cplx<T>& a) {
  using std::cos;
  using std::exp;
  using std::sin;
  T m = exp(a.re);
  return Cplx<T>(m * cos(a.im), m * sin(a.im));
}

// principal branch
template <class T>
Cplx<T> log(const Cplx<T>& a) {
  using std::atan2;
  using std::log;
  return Cplx<T>(0.5 * log(norm2(a)), atan2(a.im, a.re));
}

inline std::complex<double> to_std(const Cplx<double>& a) { return {a.re, a.im}; }
inline Cplx<double> from_std(std::complex<double> a) { return {a.real(), a.imag()}; }

}  // namespace qkforge
