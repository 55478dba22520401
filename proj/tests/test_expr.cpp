#include <doctest.h>

#include "attnflow/expr.hpp"

using namespace attnflow;

TEST_CASE("collect merges equal monomials and sorts") {
  const Polynomial p({Term{2, slots({0, 4})}, Term{1, slots({1})}, Term{3, slots({0, 4})}});
  REQUIRE(p.terms().size() == 2);
  uint64_t total = 0;
  for (const Term& t : p.terms()) total += t.coeff;
  CHECK(total == 6);
  CHECK(p == Polynomial({Term{1, slots({1})}, Term{5, slots({0, 4})}}));
}

TEST_CASE("evaluate multiplies boundaries") {
  const BoundaryVector b{{2, 3, 5, 7, 11, 13, 17, 19}};
  const auto p = Polynomial::monomial(4, slots({0, 5})) + Polynomial::monomial(1, slots({3}));
  CHECK(p.evaluate(b) == 4 * 2 * 13 + 7);
  CHECK(p.evaluate_double(b) == doctest::Approx(4.0 * 2 * 13 + 7));
  CHECK(eval_monomial(inter_of({Dim::I, Dim::J}), b) == 2 * 7);
  CHECK(eval_monomial(intra_of({Dim::K}), b) == 13);
}

TEST_CASE("times shifts exponents") {
  const auto p = Polynomial::monomial(1, slots({1})).times(3, slots({1, 2}));
  CHECK(p.max_exponent() == 2);
  CHECK(p.terms().front().coeff == 3);
  CHECK(p.terms().front().mask() == 0b110);
}

TEST_CASE("to_string uses boundary names") {
  CHECK(Polynomial::monomial(1, slots({1, 4, 5})).to_string() == "kD*iG*kG");
  CHECK(Polynomial::monomial(2, slots({3})).to_string() == "2*jD");
  CHECK(Polynomial::zero().empty());
}
