#include "bsinst/form.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace bsinst {

namespace {
constexpr double kPruneThreshold = 1e-300;

void require_same_gens(const Form& a, const Form& b) {
  const auto& ga = a.generators();
  const auto& gb = b.generators();
  if (!ga || !gb) return;  // zero forms without a set attach freely
  if (ga == gb) return;
  if (*ga == *gb) return;
  throw std::invalid_argument("forms over different generator sets");
}

GenSetPtr pick_gens(const Form& a, const Form& b) {
  return a.generators() ? a.generators() : b.generators();
}
}  // namespace

GeneratorSet::GeneratorSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() > 16) throw std::invalid_argument("generator sets are limited to 16 entries");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw std::invalid_argument("duplicate generator label: " + n);
  }
}

int GeneratorSet::index_of(const std::string& name) const {
  for (size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int merge_sign(Mask I, Mask J) {
  int parity = 0;
  Mask t = J;
  while (t) {
    int j = std::countr_zero(t);
    parity ^= popcount(static_cast<Mask>(I >> (j + 1))) & 1;
    t &= static_cast<Mask>(t - 1);
  }
  return parity ? -1 : 1;
}

Form::Form(int degree, GenSetPtr gens, std::vector<Entry> entries)
    : degree_(degree), gens_(std::move(gens)) {
  *this = accumulate(degree_, gens_, std::move(entries));
}

Form Form::accumulate(int degree, GenSetPtr gens, std::vector<Entry>&& terms) {
  std::sort(terms.begin(), terms.end(),
            [](const Entry& a, const Entry& b) { return a.mask < b.mask; });
  Form out(degree, std::move(gens));
  out.entries_.reserve(terms.size());
  size_t i = 0;
  while (i < terms.size()) {
    Mask m = terms[i].mask;
    Quatd acc = terms[i].coeff;
    ++i;
    while (i < terms.size() && terms[i].mask == m) {
      acc += terms[i].coeff;
      ++i;
    }
    if (norm(acc) >= kPruneThreshold) out.entries_.push_back({m, acc});
  }
  return out;
}

Quatd Form::coeff(Mask m) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), m,
                             [](const Entry& e, Mask v) { return e.mask < v; });
  if (it != entries_.end() && it->mask == m) return it->coeff;
  return Quatd();
}

Form Form::operator+(const Form& o) const {
  require_same_gens(*this, o);
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  if (degree_ != o.degree_) throw std::invalid_argument("adding forms of different degree");
  std::vector<Entry> terms = entries_;
  terms.insert(terms.end(), o.entries_.begin(), o.entries_.end());
  return accumulate(degree_, pick_gens(*this, o), std::move(terms));
}

Form Form::operator-(const Form& o) const { return *this + o.scaled(-1.0); }

Form Form::scaled(double s) const {
  Form out(degree_, gens_);
  out.entries_.reserve(entries_.size());
  for (const auto& e : entries_) {
    Quatd q = s * e.coeff;
    if (norm(q) >= kPruneThreshold) out.entries_.push_back({e.mask, q});
  }
  return out;
}

Form Form::left_mul(const Quatd& q) const {
  Form out(degree_, gens_);
  out.entries_.reserve(entries_.size());
  for (const auto& e : entries_) {
    Quatd c = q * e.coeff;
    if (norm(c) >= kPruneThreshold) out.entries_.push_back({e.mask, c});
  }
  return out;
}

Form Form::right_mul(const Quatd& q) const {
  Form out(degree_, gens_);
  out.entries_.reserve(entries_.size());
  for (const auto& e : entries_) {
    Quatd c = e.coeff * q;
    if (norm(c) >= kPruneThreshold) out.entries_.push_back({e.mask, c});
  }
  return out;
}

Form Form::sandwich(const Quatd& q) const {
  Quatd qc = q.conj();
  Form out(degree_, gens_);
  out.entries_.reserve(entries_.size());
  for (const auto& e : entries_) {
    Quatd c = q * e.coeff * qc;
    if (norm(c) >= kPruneThreshold) out.entries_.push_back({e.mask, c});
  }
  return out;
}

Form Form::conj() const {
  Form out(degree_, gens_);
  out.entries_.reserve(entries_.size());
  for (const auto& e : entries_) out.entries_.push_back({e.mask, e.coeff.conj()});
  return out;
}

Form Form::real() const {
  Form out(degree_, gens_);
  for (const auto& e : entries_) {
    Quatd c = e.coeff.real();
    if (norm(c) >= kPruneThreshold) out.entries_.push_back({e.mask, c});
  }
  return out;
}

Form Form::imag() const {
  Form out(degree_, gens_);
  for (const auto& e : entries_) {
    Quatd c = e.coeff.imag();
    if (norm(c) >= kPruneThreshold) out.entries_.push_back({e.mask, c});
  }
  return out;
}

Form wedge(const Form& a, const Form& b) {
  require_same_gens(a, b);
  std::vector<Form::Entry> terms;
  terms.reserve(a.entries().size() * b.entries().size());
  for (const auto& ea : a.entries()) {
    for (const auto& eb : b.entries()) {
      if (ea.mask & eb.mask) continue;
      Quatd c = ea.coeff * eb.coeff;
      if (merge_sign(ea.mask, eb.mask) < 0) c = -c;
      terms.push_back({static_cast<Mask>(ea.mask | eb.mask), c});
    }
  }
  return Form::accumulate(a.degree() + b.degree(), pick_gens(a, b), std::move(terms));
}

Form module_action(const Quatd& a, const Form& f, ActionMode mode) {
  switch (mode) {
    case ActionMode::Left: return f.left_mul(a);
    case ActionMode::Right: return f.right_mul(a);
    case ActionMode::Sandwich: return f.sandwich(a);
  }
  throw std::invalid_argument("unknown action mode");
}

Form interior_product(std::span<const double> v, const Form& a) {
  if (a.degree() == 0) throw std::domain_error("interior product of a 0-form");
  if (a.generators() && static_cast<int>(v.size()) != a.generators()->size())
    throw std::invalid_argument("dual vector length does not match generator count");
  std::vector<Form::Entry> terms;
  for (const auto& e : a.entries()) {
    Mask t = e.mask;
    int pos = 0;
    while (t) {
      int i = std::countr_zero(t);
      double vi = v[static_cast<size_t>(i)];
      if (vi != 0.0) {
        double s = (pos & 1) ? -vi : vi;
        terms.push_back({static_cast<Mask>(e.mask & ~(Mask(1) << i)), s * e.coeff});
      }
      ++pos;
      t &= static_cast<Mask>(t - 1);
    }
  }
  return Form::accumulate(a.degree() - 1, a.generators(), std::move(terms));
}

double coefficient_norm(const Form& a, NormKind kind) {
  double acc = 0.0;
  for (const auto& e : a.entries()) {
    double n2 = e.coeff.norm2();
    if (kind == NormKind::Max) {
      acc = std::max(acc, n2);
    } else {
      acc += n2;
    }
  }
  return std::sqrt(acc);
}

double rel_residual(const Form& l, const Form& r) {
  double diff = coefficient_norm(l - r);
  return diff / std::max({1.0, coefficient_norm(l), coefficient_norm(r)});
}

Form generator_form(const GenSetPtr& gens, int i, const Quatd& q) {
  Form out(1, gens);
  return out + Form(1, gens, {{static_cast<Mask>(Mask(1) << i), q}});
}

Form combination(const GenSetPtr& gens, std::span<const std::pair<Quatd, int>> terms) {
  std::vector<Form::Entry> e;
  e.reserve(terms.size());
  for (const auto& [q, i] : terms) e.push_back({static_cast<Mask>(Mask(1) << i), q});
  return Form::accumulate(1, gens, std::move(e));
}

Form substitute(const Form& a, std::span<const Form> rows, const GenSetPtr& target) {
  std::vector<Form::Entry> terms;
  Form unit(0, target, {{0, Quatd(1.0)}});
  for (const auto& e : a.entries()) {
    Form prod = unit;
    Mask t = e.mask;
    while (t) {
      int i = std::countr_zero(t);
      prod = wedge(prod, rows[static_cast<size_t>(i)]);
      t &= static_cast<Mask>(t - 1);
    }
    for (const auto& p : prod.entries()) {
      terms.push_back({p.mask, e.coeff * p.coeff});
    }
  }
  return Form::accumulate(a.degree(), target, std::move(terms));
}

Form star_orthonormal(const Form& a, int n, double sign, const GenSetPtr& gens) {
  Mask full = static_cast<Mask>((1u << n) - 1u);
  std::vector<Form::Entry> terms;
  terms.reserve(a.entries().size());
  for (const auto& e : a.entries()) {
    Mask comp = static_cast<Mask>(full & ~e.mask);
    double s = sign * merge_sign(e.mask, comp);
    terms.push_back({comp, s * e.coeff});
  }
  return Form::accumulate(n - a.degree(), gens, std::move(terms));
}

}  // namespace bsinst
