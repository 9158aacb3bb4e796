#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fixtures.hpp"

using namespace branelab;
using fixtures::form;

namespace {

double perm_sign(std::vector<int> p) {
  double s = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) s = -s;
  return s;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// (a ^ b)(v_1..v_{p+q}) from the alternating-sum definition.
double wedge_oracle(const DifferentialForm& a, const DifferentialForm& b, const std::vector<double>& pt,
                    const std::vector<Eigen::VectorXd>& vs) {
  const int p = a.degree(), q = b.degree();
  std::vector<int> perm(p + q);
  std::iota(perm.begin(), perm.end(), 0);
  double sum = 0.0;
  do {
    std::vector<Eigen::VectorXd> va, vb;
    for (int i = 0; i < p; ++i) va.push_back(vs[perm[i]]);
    for (int i = p; i < p + q; ++i) vb.push_back(vs[perm[i]]);
    sum += perm_sign(perm) * a.eval_on(pt, va) * b.eval_on(pt, vb);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum / (factorial(p) * factorial(q));
}

Eigen::VectorXd unit(int n, int i) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v(i) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("wedge examples") {
  auto m = fixtures::r4();
  auto w = wedge(form(m, "dx1"), form(m, "dx2"));
  CHECK(w == form(m, "dx1^dx2"));
  CHECK(w.coefficient({0, 1}) == ScalarField::constant(m, 1.0));
  CHECK(wedge(form(m, "dx1"), form(m, "dx1")).is_zero());
  auto lhs = wedge(form(m, "dx1^dy2"), form(m, "dy1^dx2"));
  CHECK(lhs == form(m, "-dx1^dx2^dy1^dy2"));
  // permutation-sign oracle on the coordinate basis
  std::vector<double> pt(4, 0.0);
  std::vector<Eigen::VectorXd> basis{unit(4, 0), unit(4, 1), unit(4, 2), unit(4, 3)};
  CHECK(lhs.eval_on(pt, basis) ==
        doctest::Approx(wedge_oracle(form(m, "dx1^dy2"), form(m, "dy1^dx2"), pt, basis)));
  CHECK(lhs.eval_on(pt, basis) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(wedge(form(m, "dx1^dx2^dy1"), form(m, "dx1^dy2")), DegreeError);
}

TEST_CASE("wedge agrees with the alternating-sum oracle") {
  auto m = fixtures::t4();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    for (auto [p, q] : {std::pair{1, 1}, std::pair{1, 2}, std::pair{2, 2}}) {
      auto a = fixtures::random_form(m, p, rng, 1);
      auto b = fixtures::random_form(m, q, rng, 1);
      auto pt = fixtures::random_point(m, rng);
      std::vector<Eigen::VectorXd> vs;
      for (int k = 0; k < p + q; ++k) vs.push_back(Eigen::VectorXd::NullaryExpr(4, [&] { return u(rng); }));
      CHECK(wedge(a, b).eval_on(pt, vs) == doctest::Approx(wedge_oracle(a, b, pt, vs)).epsilon(1e-10));
    }
  }
}

TEST_CASE("ext_d examples") {
  auto m = ManifoldModel::make({{"x1", CoordKind::Line}, {"q", CoordKind::Circle}}, 1);
  CHECK(ext_d(form(m, "x1*dq")) == form(m, "dx1^dq"));
  auto r4 = fixtures::r4();
  CHECK(ext_d(fixtures::omega4(r4)).is_zero());
  CHECK(ext_d(form(r4, "x1*dx2")) == form(r4, "dx1^dx2"));
  CHECK_THROWS_AS(ext_d(form(r4, "dx1^dx2^dy1^dy2")), DegreeError);
}

TEST_CASE("exterior calculus identities on random forms") {
  auto m = ManifoldModel::make({{"a", CoordKind::Circle}, {"b", CoordKind::Line},
                                {"c", CoordKind::Circle}, {"e", CoordKind::Line}});
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 8; ++trial) {
    for (int k = 0; k <= 2; ++k) {
      auto a = fixtures::random_form(m, k, rng);
      CHECK(ext_d(ext_d(a)).is_zero());
    }
    auto a = fixtures::random_form(m, 1, rng);
    auto b = fixtures::random_form(m, 2, rng, 1);
    auto f = fixtures::random_form(m, 1, rng, 1);
    // graded commutativity
    CHECK(wedge(a, b) == wedge(b, a));
    CHECK(wedge(a, f) == -wedge(f, a));
    // Leibniz with sign (-1)^|a|
    CHECK(ext_d(wedge(a, b)) == wedge(ext_d(a), b) - wedge(a, ext_d(b)));
    auto g = fixtures::random_form(m, 0, rng);
    CHECK(ext_d(wedge(g, a)) == wedge(ext_d(g), a) + wedge(g, ext_d(a)));
  }
}

TEST_CASE("interior examples") {
  auto r4 = fixtures::r4();
  auto X = parse_vector(r4, "d/dx1");
  CHECK(interior(X, form(r4, "dx1^dx2")) == form(r4, "dx2"));
  auto m = ManifoldModel::make({{"x1", CoordKind::Line}, {"q", CoordKind::Circle}}, 1);
  CHECK(interior(parse_vector(m, "d/dq"), form(m, "x1*dq")) == DifferentialForm(parse_field(m, "x1")));
  CHECK_THROWS_AS(interior(X, DifferentialForm(parse_field(r4, "x1"))), DegreeError);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = fixtures::random_form(r4, 2, rng);
    std::vector<ScalarField> comps;
    for (int i = 0; i < 4; ++i) comps.push_back(fixtures::random_field(r4, rng, 2));
    VectorField Y(r4, comps);
    CHECK(interior(Y, interior(Y, a)).is_zero());
  }
}

TEST_CASE("lie derivative examples") {
  auto r4 = fixtures::r4();
  CHECK(lie_derivative(parse_vector(r4, "d/dx1"), form(r4, "dx1^dx2")).is_zero());
  CHECK(lie_derivative(parse_vector(r4, "0.4142*d/dx1"), fixtures::F4(r4)).is_zero());
  std::mt19937_64 rng(8);
  auto F = fixtures::F4(r4);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<ScalarField> comps;
    for (int i = 0; i < 4; ++i) comps.push_back(fixtures::random_field(r4, rng, 2));
    VectorField X(r4, comps);
    CHECK(lie_derivative(X, F) == ext_d(interior(X, F)));
  }
}

namespace {

// Flow of X with its Jacobian by fine RK4 (oracle for Cartan's formula).
void flow_with_jacobian(const VectorField& X, std::vector<double> x, double t, std::vector<double>& out,
                        Eigen::MatrixXd& J) {
  const int n = static_cast<int>(X.dim());
  FieldMatrix DX(X.model(), n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) DX(i, j) = X[i].partial(j);
  J = Eigen::MatrixXd::Identity(n, n);
  const int steps = 400;
  const double h = t / steps;
  auto rhs = [&](const std::vector<double>& y, const Eigen::MatrixXd& Jy, std::vector<double>& dy,
                 Eigen::MatrixXd& dJ) {
    dy = X.eval(y);
    dJ = DX.eval(y) * Jy;
  };
  for (int s = 0; s < steps; ++s) {
    std::vector<double> k1, k2, k3, k4, y(n);
    Eigen::MatrixXd j1, j2, j3, j4;
    rhs(x, J, k1, j1);
    for (int i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k1[i];
    rhs(y, J + 0.5 * h * j1, k2, j2);
    for (int i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k2[i];
    rhs(y, J + 0.5 * h * j2, k3, j3);
    for (int i = 0; i < n; ++i) y[i] = x[i] + h * k3[i];
    rhs(y, J + h * j3, k4, j4);
    for (int i = 0; i < n; ++i) x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    J += h / 6 * (j1 + 2 * j2 + 2 * j3 + j4);
  }
  out = x;
}

}  // namespace

TEST_CASE("lie derivative matches the pullback derivative along the flow") {
  auto m = ManifoldModel::make({{"a", CoordKind::Circle}, {"b", CoordKind::Circle}, {"c", CoordKind::Line}});
  auto X = parse_vector(m, "sin(2*pi*b)*d/da + 0.5*cos(2*pi*a)*d/db + c*d/dc");
  auto B = form(m, "cos(2*pi*(a + b))*da^db + c^2*db^dc + sin(2*pi*a)*da^dc", 2);
  const std::vector<double> p{0.3, 0.7, 0.4};
  const Eigen::MatrixXd exact = lie_derivative(X, B).matrix_at(p);
  auto pulled = [&](double t) {
    std::vector<double> y;
    Eigen::MatrixXd J;
    flow_with_jacobian(X, p, t, y, J);
    return Eigen::MatrixXd(J.transpose() * B.matrix_at(y) * J);
  };
  std::vector<double> lh, le;
  for (double h : {0.08, 0.04, 0.02, 0.01}) {
    const Eigen::MatrixXd fd = (pulled(h) - pulled(-h)) / (2 * h);
    lh.push_back(std::log(h));
    le.push_back(std::log((fd - exact).cwiseAbs().maxCoeff()));
  }
  // least-squares slope of log error against log h
  const double mh = std::accumulate(lh.begin(), lh.end(), 0.0) / lh.size();
  const double me = std::accumulate(le.begin(), le.end(), 0.0) / le.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < lh.size(); ++i) {
    num += (lh[i] - mh) * (le[i] - me);
    den += (lh[i] - mh) * (lh[i] - mh);
  }
  CHECK(num / den >= 1.9);
}

TEST_CASE("sharp examples") {
  auto r4 = fixtures::r4();
  auto X = sharp(fixtures::omega4(r4), form(r4, "0.25*dy2"));
  CHECK(X == parse_vector(r4, "0.25*d/dx1"));
  CHECK(sharp(fixtures::omega4(r4), DifferentialForm(r4, 1)).is_zero());
  // Darboux: solve the linear system independently and compare
  auto w = form(r4, "dx1^dy1 + dx2^dy2", 2);
  auto Y = sharp(w, form(r4, "dy1"));
  Eigen::MatrixXd W = w.matrix().constant_value();
  Eigen::VectorXd xi(4);
  xi << 0, 0, 1, 0;
  Eigen::VectorXd sol = W.transpose().fullPivLu().solve(xi);
  for (int i = 0; i < 4; ++i) CHECK(Y[i].eval(std::vector<double>(4, 0.0)) == doctest::Approx(sol(i)));
  CHECK(interior(Y, w) == form(r4, "dy1"));
  CHECK(Y == parse_vector(r4, "d/dx1"));
  CHECK_THROWS_AS(sharp(form(r4, "dx1^dy1", 2), form(r4, "dy1")), DegenerateForm);
  CHECK_THROWS_AS(sharp(form(r4, "(1 + x1^2)*dx1^dy1 + dx2^dy2", 2), form(r4, "dy1")), NonConstantForm);
  auto v = sharp_at(form(r4, "(1 + x1^2)*dx1^dy1 + dx2^dy2", 2), form(r4, "dy1"), std::vector<double>{1, 0, 0, 0});
  CHECK(v(0) == doctest::Approx(0.5));
}

TEST_CASE("endo_from_pair examples") {
  auto r4 = fixtures::r4();
  auto om = fixtures::omega4(r4);
  auto F = fixtures::F4(r4);
  auto I = endo_from_pair(om, F);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
  // columns are images of d/dx1, d/dx2, d/dy1, d/dy2 (order x1 x2 y1 y2)
  expected(2, 0) = 1;   // I d/dx1 = d/dy1
  expected(3, 1) = 1;   // I d/dx2 = d/dy2
  expected(0, 2) = -1;  // I d/dy1 = -d/dx1
  expected(1, 3) = -1;  // I d/dy2 = -d/dx2
  CHECK(I == FieldMatrix::constant(r4, expected));
  CHECK(I * I == -FieldMatrix::identity(r4, 4));
  CHECK(endo_from_pair(om, om) == FieldMatrix::identity(r4, 4));
  CHECK(endo_from_pair(om, -F) == -I);
  CHECK(two_form_from(om, I) == F);
  // omega(I v, w) = F(v, w)
  std::vector<double> pt(4, 0.0);
  Eigen::MatrixXd Wn = om.matrix_at(pt), Fn = F.matrix_at(pt), In = I.constant_value();
  CHECK((In.transpose() * Wn - Fn).cwiseAbs().maxCoeff() == 0.0);
  // I* on coordinate differentials
  CHECK(endo_dual(I, form(r4, "dx1")) == form(r4, "-dy1"));
  CHECK(endo_dual(I, form(r4, "dy1")) == form(r4, "dx1"));
  CHECK(endo_dual(I, form(r4, "dx2")) == form(r4, "-dy2"));
  CHECK(endo_dual(I, form(r4, "dy2")) == form(r4, "dx2"));
}

TEST_CASE("round trip F -> I -> omega o I on random constant pairs") {
  auto r4 = fixtures::r4();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  auto om = form(r4, "dx1^dy1 + dx2^dy2 + 0.3*dx1^dx2", 2);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(4, 4, [&] { return u(rng); });
    Eigen::MatrixXd s = a - a.transpose();
    auto F = DifferentialForm::from_matrix(FieldMatrix::constant(r4, s));
    auto back = two_form_from(om, endo_from_pair(om, F));
    CHECK((back - F).max_abs_coefficient() <= 1e-12);
  }
}

TEST_CASE("is_type_11 examples") {
  auto r4 = fixtures::r4();
  auto I = endo_from_pair(fixtures::omega4(r4), fixtures::F4(r4));
  for (const char* b : {"dx1^dy1", "dx2^dy2", "dx1^dx2 + dy1^dy2", "-dx1^dy2 + dy1^dx2"})
    CHECK(is_type_11(form(r4, b, 2), I).pass);
  auto bad = is_type_11(form(r4, "dx1^dx2", 2), I);
  CHECK_FALSE(bad.pass);
  CHECK(bad.conditions[0].mode == Mode::Exact);
  // B(I d/dx1, I d/dx2) - B(d/dx1, d/dx2) = B(d/dy1, d/dy2) - 1 = -1
  CHECK(type11_defect(form(r4, "dx1^dx2", 2), I)(0, 1) == ScalarField::constant(r4, -1.0));
  CHECK_FALSE(is_type_11(form(r4, "dy1^dy2", 2), I).pass);
}

TEST_CASE("restrict_to_frame examples") {
  auto r4 = fixtures::r4();
  auto om = fixtures::omega4(r4);
  std::vector<double> pt{0.1, 0.2, 0.3, 0.4};
  Distribution frame(r4, {parse_vector(r4, "d/dx1"), parse_vector(r4, "d/dy2")});
  Eigen::Matrix2d expected;
  expected << 0, 1, -1, 0;
  CHECK((restrict_to_frame(om, frame, pt) - expected).cwiseAbs().maxCoeff() == 0.0);
  auto q = ManifoldModel::with_circle(fixtures::t4(), "q");
  auto omY = fixtures::omega4(fixtures::t4()).extend_to(q);
  Distribution kernel(q, {parse_vector(q, "d/dq")});
  CHECK(restrict_to_frame(omY, kernel, std::vector<double>(5, 0.2)).cwiseAbs().maxCoeff() == 0.0);
  Distribution all(r4, {parse_vector(r4, "d/dx1"), parse_vector(r4, "d/dx2"), parse_vector(r4, "d/dy1"),
                        parse_vector(r4, "d/dy2")});
  Eigen::Matrix4d Fm;
  Fm << 0, 1, 0, 0, -1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 1, 0;
  CHECK((restrict_to_frame(fixtures::F4(r4), all, pt) - Fm).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("form text round trip") {
  auto m = fixtures::t4();
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = fixtures::random_form(m, 2, rng, 2);
    CHECK(form(m, a.to_string(), 2) == a);
  }
  CHECK_THROWS_AS(form(m, "dx1 + dx1^dx2"), ParseError);
  CHECK_THROWS_AS(form(m, "dx1", 2), ParseError);
}
