#pragma once

// Monomials and polynomials over the eight tiling boundaries.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "attnflow/core.hpp"

namespace attnflow {

using Exponents = std::array<uint8_t, 8>;

struct Term {
  uint64_t coeff = 1;
  Exponents exp{};

  /// 8-bit mask of slots with a nonzero exponent.
  uint8_t mask() const;
  bool operator==(const Term&) const = default;
};

/// Sum of coeff * prod_s b[s]^exp[s]. After collect() terms are sorted by
/// exponent vector and distinct.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Term> terms) : terms_(std::move(terms)) { collect(); }

  static Polynomial monomial(uint64_t coeff, Exponents exp);
  static Polynomial zero() { return {}; }

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  Polynomial& operator+=(const Polynomial& o);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  /// Multiplies every term by a monomial.
  Polynomial times(uint64_t coeff, const Exponents& exp) const;
  Polynomial scaled(uint64_t coeff) const { return times(coeff, Exponents{}); }

  uint64_t evaluate(const BoundaryVector& b) const;
  double evaluate_double(const BoundaryVector& b) const;

  /// Largest exponent of any slot in any term.
  int max_exponent() const;
  std::string to_string() const;
  bool operator==(const Polynomial&) const = default;

 private:
  void collect();
  std::vector<Term> terms_;
};

/// Exponent vector with a 1 at each listed slot.
Exponents slots(std::initializer_list<int> ones);
/// Exponent vector of the product of the given dims' inter (D) sizes.
Exponents inter_of(DimSet dims);
/// Exponent vector of the product of the given dims' intra (G) sizes.
Exponents intra_of(DimSet dims);
Exponents add(const Exponents& a, const Exponents& b);

uint64_t eval_monomial(const Exponents& e, const BoundaryVector& b);

}  // namespace attnflow
