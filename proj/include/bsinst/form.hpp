#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bsinst/quaternion.hpp"

namespace bsinst {

// Ordered set of real generator 1-forms; the order is the orientation and is
// what every wedge sign is computed against. At most 16 generators, so an
// index set packs into one uint16_t.
class GeneratorSet {
 public:
  explicit GeneratorSet(std::vector<std::string> names);
  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int i) const { return names_[static_cast<size_t>(i)]; }
  const std::vector<std::string>& names() const { return names_; }
  int index_of(const std::string& name) const;  // -1 when absent
  bool operator==(const GeneratorSet& o) const { return names_ == o.names_; }

 private:
  std::vector<std::string> names_;
};

using GenSetPtr = std::shared_ptr<const GeneratorSet>;

using Mask = std::uint16_t;

inline int popcount(Mask m) { return std::popcount(m); }

// Sign of e_I ^ e_J for disjoint sorted index sets: parity of pairs (i in I,
// j in J) with i > j.
int merge_sign(Mask I, Mask J);

// Alternating tensor of fixed degree with quaternion coefficients over a
// GeneratorSet. Entries are kept sorted by mask with near-zero coefficients
// (norm < 1e-300) pruned. Immutable in practice: every operation returns a
// new value.
class Form {
 public:
  struct Entry {
    Mask mask;
    Quatd coeff;
  };

  Form() : degree_(0) {}
  Form(int degree, GenSetPtr gens) : degree_(degree), gens_(std::move(gens)) {}
  Form(int degree, GenSetPtr gens, std::vector<Entry> entries);

  int degree() const { return degree_; }
  const GenSetPtr& generators() const { return gens_; }
  const std::vector<Entry>& entries() const { return entries_; }
  bool is_zero() const { return entries_.empty(); }

  Quatd coeff(Mask m) const;

  Form operator+(const Form& o) const;
  Form operator-(const Form& o) const;
  Form operator-() const { return scaled(-1.0); }
  Form scaled(double s) const;
  Form left_mul(const Quatd& q) const;    // q * coeff
  Form right_mul(const Quatd& q) const;   // coeff * q
  Form sandwich(const Quatd& q) const;    // q * coeff * conj(q)
  Form conj() const;
  Form real() const;
  Form imag() const;

  // Builder used by the algebra kernels: accumulates (mask, coeff) terms and
  // normalizes once.
  static Form accumulate(int degree, GenSetPtr gens, std::vector<Entry>&& terms);

 private:
  int degree_;
  GenSetPtr gens_;
  std::vector<Entry> entries_;
};

// Noncommutative wedge: coefficient of e_K is the signed sum over splittings
// K = I u J of coeff_A(I) * coeff_B(J), quaternion product in that order.
Form wedge(const Form& a, const Form& b);

enum class ActionMode { Left, Right, Sandwich };
Form module_action(const Quatd& a, const Form& f, ActionMode mode);

// Contraction in the first slot by a real dual vector given in generator-dual
// coordinates. Degree drops by one; contracting a 0-form is a domain error.
Form interior_product(std::span<const double> v, const Form& a);

enum class NormKind { Max, Frobenius };
double coefficient_norm(const Form& a, NormKind kind = NormKind::Max);

// Relative residual of the identity L = R:  |L - R|_max / max(1, |L|, |R|).
double rel_residual(const Form& l, const Form& r);

// Generator 1-form e_i with an optional quaternion coefficient.
Form generator_form(const GenSetPtr& gens, int i, const Quatd& q = Quatd(1.0));

// Quaternion-valued 1-form sum q_1 e_{i_1} + ... given as (coeff, index).
Form combination(const GenSetPtr& gens, std::span<const std::pair<Quatd, int>> terms);

// Substitute each generator e_i of `a` by the 1-form rows[i] (over a possibly
// different generator set) and expand. Rows must have real coefficients for
// the result to be independent of coefficient ordering; that is the only use
// here (basis changes between coframes).
Form substitute(const Form& a, std::span<const Form> rows, const GenSetPtr& target);

// Hodge dual in an abstract orthonormal basis of dimension n with volume
// form sign * e_{0...n-1}.
Form star_orthonormal(const Form& a, int n, double sign, const GenSetPtr& gens);

}  // namespace bsinst
