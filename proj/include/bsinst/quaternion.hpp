#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "bsinst/dual.hpp"

namespace bsinst {

// Quaternion over a generic scalar ring (double or nested Dual). Components
// in the basis 1, i, j, k with the Hamilton table ij = k, jk = i, ki = j.
template <class T>
struct Quat {
  T w{}, x{}, y{}, z{};

  constexpr Quat() = default;
  constexpr Quat(T w_, T x_ = T{}, T y_ = T{}, T z_ = T{}) : w(w_), x(x_), y(y_), z(z_) {}

  friend Quat operator+(const Quat& a, const Quat& b) {
    return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Quat operator-(const Quat& a, const Quat& b) {
    return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Quat operator-(const Quat& a) { return {-a.w, -a.x, -a.y, -a.z}; }
  friend Quat operator*(const Quat& a, const Quat& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
  }
  friend Quat operator*(const T& s, const Quat& q) { return {s * q.w, s * q.x, s * q.y, s * q.z}; }
  friend Quat operator*(const Quat& q, const T& s) { return {q.w * s, q.x * s, q.y * s, q.z * s}; }
  Quat& operator+=(const Quat& o) { *this = *this + o; return *this; }
  Quat& operator-=(const Quat& o) { *this = *this - o; return *this; }

  Quat conj() const { return {w, -x, -y, -z}; }
  Quat real() const { return {w}; }
  Quat imag() const { return {T{}, x, y, z}; }
  T norm2() const { return w * w + x * x + y * y + z * z; }

  T component(int u) const {
    switch (u) {
      case 0: return w;
      case 1: return x;
      case 2: return y;
      default: return z;
    }
  }
};

using Quatd = Quat<double>;

inline double norm(const Quatd& q) { return std::sqrt(q.norm2()); }

inline Quatd inverse(const Quatd& q) {
  double n2 = q.norm2();
  if (n2 <= 0.0) throw std::domain_error("inverse of zero quaternion");
  return (1.0 / n2) * q.conj();
}

template <class T>
Quat<T> quat_inverse(const Quat<T>& q) {
  T n2 = q.norm2();
  return (T(1.0) / n2) * q.conj();
}

// Unit basis quaternion 1, i, j, k.
template <class T = double>
Quat<T> quat_unit(int u) {
  Quat<T> q;
  switch (u) {
    case 0: q.w = T(1.0); break;
    case 1: q.x = T(1.0); break;
    case 2: q.y = T(1.0); break;
    default: q.z = T(1.0); break;
  }
  return q;
}

template <class T>
Quatd quat_value(const Quat<T>& q) {
  return {value(q.w), value(q.x), value(q.y), value(q.z)};
}

// Derivative slot of a dual-valued quaternion, one level down.
template <class T>
Quat<T> quat_deriv(const Quat<Dual<T>>& q) {
  return {q.w.der, q.x.der, q.y.der, q.z.der};
}

template <class T>
Quat<Dual<T>> quat_lift(const Quat<T>& q) {
  return {Dual<T>(q.w, T{}), Dual<T>(q.x, T{}), Dual<T>(q.y, T{}), Dual<T>(q.z, T{})};
}

}  // namespace bsinst
