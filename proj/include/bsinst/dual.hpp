#pragma once

#include <cmath>

namespace bsinst {

// Forward-mode scalar carrying one derivative slot. Nesting Dual<Dual<double>>
// gives exact second derivatives; that is as deep as the library ever goes
// (one nesting level per application of the exterior derivative).
template <class T>
struct Dual {
  T val{};
  T der{};

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v), der(0.0) {}  // NOLINT: implicit lift
  constexpr Dual(T v, T d) : val(v), der(d) {}

  friend Dual operator+(const Dual& a, const Dual& b) { return {a.val + b.val, a.der + b.der}; }
  friend Dual operator-(const Dual& a, const Dual& b) { return {a.val - b.val, a.der - b.der}; }
  friend Dual operator-(const Dual& a) { return {-a.val, -a.der}; }
  friend Dual operator*(const Dual& a, const Dual& b) {
    return {a.val * b.val, a.val * b.der + a.der * b.val};
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    T inv2 = b.val * b.val;
    return {a.val / b.val, (a.der * b.val - a.val * b.der) / inv2};
  }
  Dual& operator+=(const Dual& o) { *this = *this + o; return *this; }
  Dual& operator-=(const Dual& o) { *this = *this - o; return *this; }
  Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
};

inline double value(double x) { return x; }
template <class T>
double value(const Dual<T>& x) { return value(x.val); }

inline double pow_real(double x, double p) { return std::pow(x, p); }
template <class T>
Dual<T> pow_real(const Dual<T>& x, double p) {
  return {pow_real(x.val, p), pow_real(x.val, p - 1.0) * p * x.der};
}

inline double sqrt_scalar(double x) { return std::sqrt(x); }
template <class T>
Dual<T> sqrt_scalar(const Dual<T>& x) {
  T s = sqrt_scalar(x.val);
  return {s, x.der / (s + s)};
}

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

}  // namespace bsinst
