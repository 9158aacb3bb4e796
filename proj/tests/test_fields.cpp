#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"

using namespace branelab;
using fixtures::field;

namespace {

ModelPtr xq() {
  return ManifoldModel::make({{"x", CoordKind::Circle}, {"y", CoordKind::Line}, {"q", CoordKind::Circle}}, 2);
}

}  // namespace

TEST_CASE("model validation") {
  CHECK_THROWS_AS(ManifoldModel::make({}), ModelError);
  CHECK_THROWS_AS(ManifoldModel::make({{"x", CoordKind::Line}, {"x", CoordKind::Line}}), ModelError);
  CHECK_THROWS_AS(ManifoldModel::make({{"x", CoordKind::Line}}, 0), ModelError);
  CHECK_THROWS_AS(ManifoldModel::make({{"x", CoordKind::Circle}}, std::nullopt, 0), ModelError);
  auto m = ManifoldModel::with_circle(fixtures::t4(), "q");
  CHECK(m->dim() == 5);
  CHECK(m->q_index() == 4u);
  auto w = m->wrap(std::vector<double>{1.25, -0.25, 0, 0, 3.5});
  CHECK(w[0] == doctest::Approx(0.25));
  CHECK(w[1] == doctest::Approx(0.75));
  CHECK(w[4] == doctest::Approx(0.5));
}

TEST_CASE("field_mul examples") {
  auto m = xq();
  auto c = field(m, "cos(2*pi*x)");
  CHECK(c * c == field(m, "0.5 + 0.5*cos(4*pi*x)"));
  auto f = field(m, "y^2*sin(2*pi*(x - q)) + 3");
  CHECK(ScalarField::constant(m, 1.0) * f == f);
  CHECK(field(m, "y") * field(m, "y") == field(m, "y^2"));
  CHECK_THROWS_AS(field(m, "y") * field(fixtures::t4(), "1"), ModelMismatch);
}

TEST_CASE("partial examples") {
  auto m = xq();
  CHECK(field(m, "y^2").partial(1) == field(m, "2*y"));
  CHECK(field(m, "cos(2*pi*x)").partial(0) == field(m, "-2*pi*sin(2*pi*x)"));
  CHECK(field(m, "cos(2*pi*x)").partial(1).is_zero());
  CHECK_THROWS_AS(field(m, "y").partial(7), ModelError);
}

TEST_CASE("circle_average examples") {
  auto m = xq();
  CHECK(circle_average(field(m, "cos(2*pi*q)^2"), 2) == field(m, "0.5"));
  CHECK(circle_average(field(m, "cos(2*pi*q)*cos(2*pi*x)"), 2).is_zero());
  auto f = field(m, "y*cos(2*pi*x)");
  CHECK(circle_average(f, 2) == f);
  CHECK_THROWS_AS(circle_average(f, 1), ModelError);
}

TEST_CASE("eval examples") {
  auto m = xq();
  std::vector<double> p{0.0, 3.0, 0.25};
  CHECK(field(m, "y^2").eval(p) == doctest::Approx(9.0));
  CHECK(std::abs(field(m, "cos(2*pi*q)").eval(p)) < 1e-12);
  CHECK(field(m, "0.5 + 0.5*cos(4*pi*x)").eval(p) == doctest::Approx(1.0));
  CHECK_THROWS_AS(field(m, "y").eval(std::vector<double>{1.0}), ModelError);
}

TEST_CASE("canonical form") {
  auto m = xq();
  // sin(-2 pi x) = -sin(2 pi x); cos is even.
  auto s = ScalarField::trig(m, {-1, 0, 0}, Phase::Sin);
  CHECK(s == field(m, "-sin(2*pi*x)"));
  CHECK(ScalarField::trig(m, {0, 0, 0}, Phase::Sin).is_zero());
  const auto g = field(m, "cos(2*pi*(q - 3*x))");
  for (const auto& [mono, c] : g.terms()) {
    auto it = std::find_if(mono.freqs.begin(), mono.freqs.end(), [](int k) { return k != 0; });
    CHECK(*it > 0);
  }
  CHECK_THROWS_AS(ScalarField::trig(m, {0, 1, 0}, Phase::Cos), ModelError);
}

TEST_CASE("product evaluates pointwise") {
  auto m = xq();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = fixtures::random_field(m, rng);
    auto b = fixtures::random_field(m, rng);
    auto p = fixtures::random_point(m, rng);
    CHECK(std::abs((a * b).eval(p) - a.eval(p) * b.eval(p)) <= 1e-10);
  }
}

TEST_CASE("mixed partials commute and periodic derivatives average to zero") {
  auto m = xq();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = fixtures::random_field(m, rng, 5);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(a.partial(i).partial(j) == a.partial(j).partial(i));
    CHECK(circle_average(a.partial(2), 2).is_zero());
  }
}

TEST_CASE("circle antiderivative") {
  auto m = xq();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = fixtures::random_field(m, rng, 4);
    auto A = a.circle_antiderivative(2);
    // A' = a and A(q=0) = 0
    CHECK(A.partial(2) == a);
    CHECK(A.substitute_circle_endpoint(2, 0).is_zero());
    // A(1) is the average
    CHECK(A.substitute_circle_endpoint(2, 1) == circle_average(a, 2));
  }
  // q^2 terms appear and are tagged as non-periodic
  auto A = field(m, "y").circle_antiderivative(2);
  CHECK_FALSE(A.is_periodic());
}

TEST_CASE("text round trip") {
  auto m = xq();
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = fixtures::random_field(m, rng, 5);
    CHECK(field(m, a.to_string()) == a);
  }
  CHECK(field(m, "1.5*y^2*cos(2*pi*(q - x))").to_string() == "1.5*y^2*cos(2*pi*(x - q))");
  CHECK(field(m, "cos(2*pi*x + pi/2)") == field(m, "-sin(2*pi*x)"));
}

TEST_CASE("parse errors carry positions") {
  auto m = xq();
  try {
    (void)field(m, "y + cos(3*x)");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 9);
  }
  CHECK_THROWS_AS(field(m, "x + 1"), ParseError);
  CHECK_THROWS_AS(field(m, "y +"), ParseError);
  CHECK_THROWS_AS(field(m, "z"), ParseError);
  CHECK_THROWS_AS(field(m, "cos(2*pi*y)"), ParseError);
}

TEST_CASE("vector fields") {
  auto m = xq();
  auto X = parse_vector(m, "d/dq - 0.5*d/dx");
  CHECK(X.apply(field(m, "cos(2*pi*(x + q))")) == field(m, "-pi*sin(2*pi*(x + q))"));
  auto Y = parse_vector(m, "y*d/dx");
  auto Z = parse_vector(m, "d/dy");
  CHECK(lie_bracket(Z, Y) == parse_vector(m, "d/dx"));
  CHECK(parse_vector(m, X.to_string()) == X);
  CHECK_THROWS_AS(VectorField(m, {field(m, "1")}), ModelError);
}

TEST_CASE("field evaluator matches eval") {
  auto m = xq();
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = fixtures::random_field(m, rng, 6);
    FieldEvaluator ev(a);
    auto p = fixtures::random_point(m, rng);
    for (std::size_t i : {0u, 2u}) p[i] -= std::floor(p[i]);
    CHECK(ev(p.data()) == doctest::Approx(a.eval(p)).epsilon(1e-12));
  }
}
