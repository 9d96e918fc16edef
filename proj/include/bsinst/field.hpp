#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bsinst/form.hpp"

namespace bsinst {

// Evaluation point. For the bundle models `q` is the fiber quaternion a; for
// the group models it is the unit element g3 of the third factor. `rho` only
// matters on the cone model.
template <class T>
struct Point {
  Quat<T> q;
  T rho{};

  T radius_sq() const { return q.norm2(); }  // r = |a|^2 on bundle models
};

using Ptd = Point<double>;
using Pt1 = Point<Dual1>;
using Pt2 = Point<Dual2>;

enum class CoordKind { FiberQuaternion, GroupLeftInvariant };

// Seed one coordinate direction: fiber models perturb a^u additively, group
// models right-translate g3 along the left-invariant direction q_{u+1}. The
// radial cone coordinate uses coord == kRhoCoord.
inline constexpr int kRhoCoord = 4;

template <class T>
Point<Dual<T>> seed_point(const Point<T>& p, int coord, CoordKind kind) {
  Point<Dual<T>> out;
  out.q = quat_lift(p.q);
  out.rho = Dual<T>(p.rho, T{});
  if (coord == kRhoCoord) {
    out.rho.der = T(1.0);
    return out;
  }
  if (kind == CoordKind::FiberQuaternion) {
    switch (coord) {
      case 0: out.q.w.der = T(1.0); break;
      case 1: out.q.x.der = T(1.0); break;
      case 2: out.q.y.der = T(1.0); break;
      default: out.q.z.der = T(1.0); break;
    }
  } else {
    Quat<T> dir = p.q * quat_unit<T>(coord + 1);
    out.q.w.der = dir.w;
    out.q.x.der = dir.x;
    out.q.y.der = dir.y;
    out.q.z.der = dir.z;
  }
  return out;
}

// Quaternion-valued coefficient field evaluable at plain and dual points.
// Base fields implement all three levels; fields produced by differentiation
// lose the deepest level (a second exterior derivative is the deepest the
// library supports).
class CoefficientField {
 public:
  virtual ~CoefficientField() = default;
  virtual Quat<double> eval(const Ptd&) const = 0;
  virtual Quat<Dual1> eval(const Pt1&) const = 0;
  virtual Quat<Dual2> eval(const Pt2&) const = 0;
};

using Field = std::shared_ptr<const CoefficientField>;

template <class F>
Field make_field(F f) {
  struct Impl final : CoefficientField {
    F fn;
    explicit Impl(F g) : fn(std::move(g)) {}
    Quat<double> eval(const Ptd& p) const override { return fn(p); }
    Quat<Dual1> eval(const Pt1& p) const override { return fn(p); }
    Quat<Dual2> eval(const Pt2& p) const override { return fn(p); }
  };
  return std::make_shared<Impl>(std::move(f));
}

Field constant_field(const Quatd& q);

// d/dx^coord of `parent` as a field one dual level shallower.
Field partial_field(Field parent, int coord, CoordKind kind);

Field product_field(Field a, Field b);           // pointwise a * b
Field right_const_field(Field a, const Quatd& q);  // a * q
Field scaled_field(Field a, double s);
Field imag_field(Field a);
Field real_field(Field a);
Field conj_field(Field a);

// Graded form whose coefficients are fields over the model's points.
class FieldForm {
 public:
  struct Entry {
    Mask mask;
    Field field;
  };

  FieldForm() : degree_(0) {}
  FieldForm(int degree, GenSetPtr gens) : degree_(degree), gens_(std::move(gens)) {}
  FieldForm(int degree, GenSetPtr gens, std::vector<Entry> entries)
      : degree_(degree), gens_(std::move(gens)), entries_(std::move(entries)) {}

  int degree() const { return degree_; }
  const GenSetPtr& generators() const { return gens_; }
  const std::vector<Entry>& entries() const { return entries_; }

  Form eval(const Ptd& p) const;

  FieldForm operator+(const FieldForm& o) const;
  FieldForm scaled(double s) const;
  FieldForm left_mul(Field c) const;   // coefficientwise c * f
  FieldForm imag() const;
  FieldForm real() const;
  FieldForm conj() const;
  FieldForm component(int u) const;    // real form of the u-th quaternion component

  static FieldForm constant(const Form& f);

 private:
  int degree_;
  GenSetPtr gens_;
  std::vector<Entry> entries_;
};

FieldForm wedge(const FieldForm& a, const FieldForm& b);

// Deterministic splittable RNG (splitmix64 core, Box-Muller gaussians) so
// suite records are reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);
  static std::uint64_t hash_string(const std::string& s);

  std::uint64_t next();
  double uniform();                 // [0, 1)
  double uniform(double a, double b);
  double gauss();
  Quatd gauss_quat();
  Quatd unit_quat();
  // Gaussian direction scaled so |a|^2 is log-uniform in [rmin, rmax].
  Quatd fiber_quat(double rmin, double rmax);

 private:
  std::uint64_t state_;
};

}  // namespace bsinst
