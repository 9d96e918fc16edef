#include "bsinst/field.hpp"

#include <cmath>

namespace bsinst {

namespace {

struct ConstField final : CoefficientField {
  Quatd q;
  explicit ConstField(const Quatd& v) : q(v) {}
  Quat<double> eval(const Ptd&) const override { return q; }
  Quat<Dual1> eval(const Pt1&) const override {
    return {Dual1(q.w), Dual1(q.x), Dual1(q.y), Dual1(q.z)};
  }
  Quat<Dual2> eval(const Pt2&) const override {
    return {Dual2(q.w), Dual2(q.x), Dual2(q.y), Dual2(q.z)};
  }
};

struct PartialField final : CoefficientField {
  Field parent;
  int coord;
  CoordKind kind;
  PartialField(Field p, int c, CoordKind k) : parent(std::move(p)), coord(c), kind(k) {}
  Quat<double> eval(const Ptd& p) const override {
    return quat_deriv(parent->eval(seed_point(p, coord, kind)));
  }
  Quat<Dual1> eval(const Pt1& p) const override {
    return quat_deriv(parent->eval(seed_point(p, coord, kind)));
  }
  Quat<Dual2> eval(const Pt2&) const override {
    throw std::logic_error("third-order exterior derivative is not supported");
  }
};

struct ProductField final : CoefficientField {
  Field a, b;
  ProductField(Field x, Field y) : a(std::move(x)), b(std::move(y)) {}
  Quat<double> eval(const Ptd& p) const override { return a->eval(p) * b->eval(p); }
  Quat<Dual1> eval(const Pt1& p) const override { return a->eval(p) * b->eval(p); }
  Quat<Dual2> eval(const Pt2& p) const override { return a->eval(p) * b->eval(p); }
};

struct RightConstField final : CoefficientField {
  Field a;
  Quatd q;
  RightConstField(Field x, const Quatd& v) : a(std::move(x)), q(v) {}
  template <class T>
  Quat<T> do_eval(const Point<T>& p) const {
    Quat<T> lift{T(q.w), T(q.x), T(q.y), T(q.z)};
    return a->eval(p) * lift;
  }
  Quat<double> eval(const Ptd& p) const override { return do_eval(p); }
  Quat<Dual1> eval(const Pt1& p) const override { return do_eval(p); }
  Quat<Dual2> eval(const Pt2& p) const override { return do_eval(p); }
};

struct ScaledField final : CoefficientField {
  Field a;
  double s;
  ScaledField(Field x, double v) : a(std::move(x)), s(v) {}
  Quat<double> eval(const Ptd& p) const override { return s * a->eval(p); }
  Quat<Dual1> eval(const Pt1& p) const override { return Dual1(s) * a->eval(p); }
  Quat<Dual2> eval(const Pt2& p) const override { return Dual2(s) * a->eval(p); }
};

enum class UnaryOp { Imag, Real, Conj };

struct UnaryField final : CoefficientField {
  Field a;
  UnaryOp op;
  UnaryField(Field x, UnaryOp o) : a(std::move(x)), op(o) {}
  template <class T>
  Quat<T> do_eval(const Point<T>& p) const {
    Quat<T> v = a->eval(p);
    switch (op) {
      case UnaryOp::Imag: return v.imag();
      case UnaryOp::Real: return v.real();
      default: return v.conj();
    }
  }
  Quat<double> eval(const Ptd& p) const override { return do_eval(p); }
  Quat<Dual1> eval(const Pt1& p) const override { return do_eval(p); }
  Quat<Dual2> eval(const Pt2& p) const override { return do_eval(p); }
};

struct ComponentField final : CoefficientField {
  Field a;
  int u;
  ComponentField(Field x, int c) : a(std::move(x)), u(c) {}
  Quat<double> eval(const Ptd& p) const override { return Quat<double>(a->eval(p).component(u)); }
  Quat<Dual1> eval(const Pt1& p) const override { return Quat<Dual1>(a->eval(p).component(u)); }
  Quat<Dual2> eval(const Pt2& p) const override { return Quat<Dual2>(a->eval(p).component(u)); }
};

}  // namespace

Field constant_field(const Quatd& q) { return std::make_shared<ConstField>(q); }

Field partial_field(Field parent, int coord, CoordKind kind) {
  return std::make_shared<PartialField>(std::move(parent), coord, kind);
}

Field product_field(Field a, Field b) {
  return std::make_shared<ProductField>(std::move(a), std::move(b));
}

Field right_const_field(Field a, const Quatd& q) {
  return std::make_shared<RightConstField>(std::move(a), q);
}

Field scaled_field(Field a, double s) { return std::make_shared<ScaledField>(std::move(a), s); }

Field imag_field(Field a) { return std::make_shared<UnaryField>(std::move(a), UnaryOp::Imag); }
Field real_field(Field a) { return std::make_shared<UnaryField>(std::move(a), UnaryOp::Real); }
Field conj_field(Field a) { return std::make_shared<UnaryField>(std::move(a), UnaryOp::Conj); }

Form FieldForm::eval(const Ptd& p) const {
  std::vector<Form::Entry> terms;
  terms.reserve(entries_.size());
  for (const auto& e : entries_) terms.push_back({e.mask, e.field->eval(p)});
  return Form::accumulate(degree_, gens_, std::move(terms));
}

FieldForm FieldForm::operator+(const FieldForm& o) const {
  if (entries_.empty()) return o;
  if (o.entries_.empty()) return *this;
  if (degree_ != o.degree_) throw std::invalid_argument("adding field forms of different degree");
  std::vector<Entry> ents = entries_;
  ents.insert(ents.end(), o.entries_.begin(), o.entries_.end());
  return FieldForm(degree_, gens_ ? gens_ : o.gens_, std::move(ents));
}

FieldForm FieldForm::scaled(double s) const {
  std::vector<Entry> ents;
  ents.reserve(entries_.size());
  for (const auto& e : entries_) ents.push_back({e.mask, scaled_field(e.field, s)});
  return FieldForm(degree_, gens_, std::move(ents));
}

FieldForm FieldForm::left_mul(Field c) const {
  std::vector<Entry> ents;
  ents.reserve(entries_.size());
  for (const auto& e : entries_) ents.push_back({e.mask, product_field(c, e.field)});
  return FieldForm(degree_, gens_, std::move(ents));
}

FieldForm FieldForm::imag() const {
  std::vector<Entry> ents;
  for (const auto& e : entries_) ents.push_back({e.mask, imag_field(e.field)});
  return FieldForm(degree_, gens_, std::move(ents));
}

FieldForm FieldForm::real() const {
  std::vector<Entry> ents;
  for (const auto& e : entries_) ents.push_back({e.mask, real_field(e.field)});
  return FieldForm(degree_, gens_, std::move(ents));
}

FieldForm FieldForm::conj() const {
  std::vector<Entry> ents;
  for (const auto& e : entries_) ents.push_back({e.mask, conj_field(e.field)});
  return FieldForm(degree_, gens_, std::move(ents));
}

FieldForm FieldForm::component(int u) const {
  std::vector<Entry> ents;
  for (const auto& e : entries_) ents.push_back({e.mask, std::make_shared<ComponentField>(e.field, u)});
  return FieldForm(degree_, gens_, std::move(ents));
}

FieldForm FieldForm::constant(const Form& f) {
  std::vector<Entry> ents;
  ents.reserve(f.entries().size());
  for (const auto& e : f.entries()) ents.push_back({e.mask, constant_field(e.coeff)});
  return FieldForm(f.degree(), f.generators(), std::move(ents));
}

FieldForm wedge(const FieldForm& a, const FieldForm& b) {
  std::vector<FieldForm::Entry> ents;
  for (const auto& ea : a.entries()) {
    for (const auto& eb : b.entries()) {
      if (ea.mask & eb.mask) continue;
      Field f = product_field(ea.field, eb.field);
      if (merge_sign(ea.mask, eb.mask) < 0) f = scaled_field(f, -1.0);
      ents.push_back({static_cast<Mask>(ea.mask | eb.mask), f});
    }
  }
  return FieldForm(a.degree() + b.degree(),
                   a.generators() ? a.generators() : b.generators(), std::move(ents));
}

std::uint64_t Rng::mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t Rng::hash_string(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Rng::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::gauss() {
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Quatd Rng::gauss_quat() { return {gauss(), gauss(), gauss(), gauss()}; }

Quatd Rng::unit_quat() {
  Quatd q = gauss_quat();
  double n = norm(q);
  while (n < 1e-8) {
    q = gauss_quat();
    n = norm(q);
  }
  return (1.0 / n) * q;
}

Quatd Rng::fiber_quat(double rmin, double rmax) {
  double r = std::pow(10.0, uniform(std::log10(rmin), std::log10(rmax)));
  return std::sqrt(r) * unit_quat();
}

}  // namespace bsinst
