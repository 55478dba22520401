#include "attnflow/expr.hpp"

#include <algorithm>
#include <sstream>

namespace attnflow {

uint8_t Term::mask() const {
  uint8_t m = 0;
  for (int s = 0; s < kNumSlots; ++s)
    if (exp[s]) m |= uint8_t(1u << s);
  return m;
}

Polynomial Polynomial::monomial(uint64_t coeff, Exponents exp) {
  Polynomial p;
  if (coeff) p.terms_.push_back({coeff, exp});
  return p;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  collect();
  return *this;
}

Polynomial Polynomial::times(uint64_t coeff, const Exponents& exp) const {
  Polynomial p;
  if (coeff == 0) return p;
  p.terms_.reserve(terms_.size());
  for (const Term& t : terms_) p.terms_.push_back({t.coeff * coeff, add(t.exp, exp)});
  p.collect();
  return p;
}

void Polynomial::collect() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return a.exp < b.exp; });
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const Term& t : terms_) {
    if (t.coeff == 0) continue;
    if (!out.empty() && out.back().exp == t.exp)
      out.back().coeff += t.coeff;
    else
      out.push_back(t);
  }
  terms_ = std::move(out);
}

uint64_t eval_monomial(const Exponents& e, const BoundaryVector& b) {
  uint64_t v = 1;
  for (int s = 0; s < kNumSlots; ++s)
    for (int k = 0; k < e[s]; ++k) v *= b.b[s];
  return v;
}

uint64_t Polynomial::evaluate(const BoundaryVector& b) const {
  uint64_t v = 0;
  for (const Term& t : terms_) v += t.coeff * eval_monomial(t.exp, b);
  return v;
}

double Polynomial::evaluate_double(const BoundaryVector& b) const {
  double v = 0;
  for (const Term& t : terms_) {
    double m = double(t.coeff);
    for (int s = 0; s < kNumSlots; ++s)
      for (int k = 0; k < t.exp[s]; ++k) m *= double(b.b[s]);
    v += m;
  }
  return v;
}

int Polynomial::max_exponent() const {
  int m = 0;
  for (const Term& t : terms_)
    for (uint8_t e : t.exp) m = std::max<int>(m, e);
  return m;
}

std::string Polynomial::to_string() const {
  static const char* kSlotNames[] = {"iD", "kD", "lD", "jD", "iG", "kG", "lG", "jG"};
  if (terms_.empty()) return "0";
  std::ostringstream os;
  for (size_t n = 0; n < terms_.size(); ++n) {
    const Term& t = terms_[n];
    if (n) os << " + ";
    bool any = false;
    if (t.coeff != 1) {
      os << t.coeff;
      any = true;
    }
    for (int s = 0; s < kNumSlots; ++s) {
      if (!t.exp[s]) continue;
      if (any) os << '*';
      os << kSlotNames[s];
      if (t.exp[s] > 1) os << '^' << int(t.exp[s]);
      any = true;
    }
    if (!any) os << '1';
  }
  return os.str();
}

Exponents slots(std::initializer_list<int> ones) {
  Exponents e{};
  for (int s : ones) e[s] += 1;
  return e;
}

Exponents inter_of(DimSet dims) {
  Exponents e{};
  for (Dim d : kAllDims)
    if (dims.contains(d)) e[inter_slot(d)] = 1;
  return e;
}

Exponents intra_of(DimSet dims) {
  Exponents e{};
  for (Dim d : kAllDims)
    if (dims.contains(d)) e[intra_slot(d)] = 1;
  return e;
}

Exponents add(const Exponents& a, const Exponents& b) {
  Exponents r;
  for (int s = 0; s < kNumSlots; ++s) r[s] = uint8_t(a[s] + b[s]);
  return r;
}

}  // namespace attnflow
