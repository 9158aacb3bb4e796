#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace branelab;
using fixtures::form;

namespace {

const double kLambda = std::sqrt(2.0) - 1.0;

SamplePlan plan(std::size_t n, std::uint64_t seed = 5) {
  SamplePlan p;
  p.count = n;
  p.seed = seed;
  return p;
}

/// S^1 x R^3 x S^1 with the product candidate.
BraneCandidate shear_stage() {
  auto N = fixtures::s1r3();
  auto Y = ManifoldModel::with_circle(N, "q");
  return BraneCandidate("shear", fixtures::omega4(N).extend_to(Y), fixtures::F4(N).extend_to(Y),
                        Distribution(Y, {VectorField::basis(Y, 4)}),
                        Distribution(Y, fixtures::coordinate_fields(Y, 0, 4)));
}

ScalarField q_free_field(const ModelPtr& N, const ModelPtr& Y, std::mt19937_64& rng) {
  return fixtures::random_field(N, rng, 4, 2).extend_to(Y);
}

}  // namespace

TEST_CASE("zero pair and r_bar") {
  auto c = fixtures::main_example();
  auto z = InfDefPair::zero(c);
  CHECK(z.r_bar.is_zero());
  CHECK(check_infdef(z, c, plan(16)).pass);
  auto rho = fixtures::field(c.model, "cos(2*pi*q)");
  auto p = InfDefPair::make(c, {rho}, DifferentialForm(c.model, 2));
  CHECK(p.r_bar == rho * DifferentialForm::dx(c.model, 4));
  CHECK(upsilon(p) == p.r_bar);
  CHECK_THROWS_AS(InfDefPair::make(c, {}, DifferentialForm(c.model, 2)), FrameMismatch);
  CHECK_THROWS_AS(InfDefPair::make(c, {rho}, DifferentialForm(c.model, 1)), DegreeError);
}

TEST_CASE("involutive complement") {
  CHECK(is_involutive_complement(fixtures::main_example()));
  CHECK(is_involutive_complement(fixtures::lagrangian_example()));
  CHECK(is_involutive_complement(fixtures::space_filling_t4()));
  auto c = fixtures::main_example();
  auto Y = c.model;
  // g0 = d/dx1 + x2-dependent tilt towards d/dq: [g0, g1] leaves G.
  auto tilt = VectorField::basis(Y, 0) + fixtures::field(Y, "sin(2*pi*x2)") * VectorField::basis(Y, 4);
  BraneCandidate t("tilt", c.omega, c.F, c.E,
                   Distribution(Y, {tilt, VectorField::basis(Y, 1), VectorField::basis(Y, 2), VectorField::basis(Y, 3)}));
  CHECK_FALSE(is_involutive_complement(t));
}

TEST_CASE("hamiltonian generator is a cocycle") {
  auto c = fixtures::main_example();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto f = fixtures::random_field(c.model, rng, 3, 2);
    const auto p = hamiltonian_generator(f, c);
    const auto v = check_infdef(p, c, plan(16));
    CHECK_MESSAGE(v.pass, f.to_string());
    CHECK(v.mode == Mode::Exact);
    CHECK(infdef_general_check(p, c, plan(16, 40 + i)).pass);
    CHECK(p.rho[0] == VectorField::basis(c.model, 4).apply(f));
  }
}

TEST_CASE("space-filling generator is d of I^* df") {
  auto c = fixtures::space_filling_t4();
  std::mt19937_64 rng(12);
  const EndoField I = endo_from_pair(c.omega, c.F);
  for (int i = 0; i < 10; ++i) {
    const auto f = fixtures::random_field(c.model, rng, 3, 2);
    const auto p = hamiltonian_generator(f, c);
    CHECK(p.rho.empty());
    CHECK(p.B == ext_d(endo_dual(I, ext_d(DifferentialForm(f)))));
  }
}

TEST_CASE("constant B on the main example") {
  auto c = fixtures::main_example();
  auto Y = c.model;
  auto good = InfDefPair::make(c, {ScalarField(Y)}, form(Y, "dx1^dy1", 2));
  auto v = check_infdef(good, c, plan(16));
  CHECK(v.pass);
  CHECK(v.at("quad_iv").detail.find("involutive") != std::string::npos);
  auto bad = InfDefPair::make(c, {ScalarField(Y)}, form(Y, "dx1^dx2", 2));
  auto w = check_infdef(bad, c, plan(16));
  CHECK_FALSE(w.pass);
  CHECK_FALSE(w.passed("quad_iv"));
  CHECK(w.passed("B_closed"));
  // a dq component breaks the mixed condition
  auto mixed = InfDefPair::make(c, {ScalarField(Y)}, form(Y, "dq^dx1", 2));
  CHECK_FALSE(check_infdef(mixed, c, plan(16)).passed("mixed_iii"));
  // a non-closed B
  auto open = InfDefPair::make(c, {ScalarField(Y)}, form(Y, "sin(2*pi*x2)*dx1^dy1", 2));
  CHECK_FALSE(check_infdef(open, c, plan(16)).passed("B_closed"));
}

TEST_CASE("build_infdef on the shear stage") {
  auto c = shear_stage();
  auto Y = c.model;
  auto N = fixtures::s1r3();
  const auto p = build_infdef(kLambda * ScalarField::coordinate(Y, 3), DifferentialForm(N, 2), c);
  CHECK(p.B == kLambda * form(Y, "dq^dx2", 2));
  CHECK(check_infdef(p, c, plan(32)).pass);
  CHECK(infdef_general_check(p, c, plan(32)).pass);

  const auto p0 = build_infdef(ScalarField(Y), form(N, "dx1^dy1", 2), c);
  CHECK(p0.B == form(Y, "dx1^dy1", 2));
}

TEST_CASE("build_infdef on the torus") {
  auto c = fixtures::main_example();
  auto Y = c.model;
  auto N = fixtures::t4();
  std::mt19937_64 rng(13);
  for (int i = 0; i < 8; ++i) {
    // q-dependent rho with zero q-average: never obstructed
    ScalarField rho = fixtures::random_field(N, rng, 2, 1).extend_to(Y) * fixtures::field(Y, "sin(2*pi*q)");
    const auto p = build_infdef(rho, form(N, "dx2^dy2", 2), c);
    CHECK(check_infdef(p, c, plan(16)).pass);
    CHECK(infdef_general_check(p, c, plan(16, 60 + i)).pass);
  }
  CHECK_THROWS_AS(build_infdef(fixtures::field(Y, "cos(2*pi*x1)^2"), DifferentialForm(N, 2), c), AverageObstruction);
  CHECK_THROWS_AS(build_infdef(ScalarField(Y), form(N, "dx1^dx2", 2), c), Type11Violation);
  CHECK_THROWS_AS(build_infdef(ScalarField(Y), form(N, "sin(2*pi*x2)*dx1^dy1", 2), c), Type11Violation);
  CHECK_THROWS_AS(build_infdef(ScalarField(Y), DifferentialForm(N, 2), fixtures::lagrangian_example()), FrameMismatch);
}

TEST_CASE("both phrasings agree") {
  auto c = fixtures::main_example();
  auto Y = c.model;
  auto N = fixtures::t4();
  std::mt19937_64 rng(14);
  std::vector<InfDefPair> corpus;
  for (int i = 0; i < 5; ++i) {
    corpus.push_back(hamiltonian_generator(fixtures::random_field(Y, rng, 3, 1), c));
    corpus.push_back(build_infdef(q_free_field(N, Y, rng) * fixtures::field(Y, "cos(2*pi*q)"),
                                  form(N, "dx1^dy1 - dx2^dy2", 2), c));
    corpus.push_back(InfDefPair::make(c, {ScalarField(Y)}, fixtures::random_form(Y, 2, rng, 1)));
    corpus.push_back(InfDefPair::make(c, {q_free_field(N, Y, rng)}, DifferentialForm(Y, 2)));
  }
  corpus.push_back(InfDefPair::make(c, {ScalarField(Y)}, form(Y, "dx1^dx2", 2)));
  int passes = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const bool a = check_infdef(corpus[i], c, plan(24)).pass;
    const bool b = infdef_general_check(corpus[i], c, plan(24)).pass;
    CHECK_MESSAGE(a == b, i);
    passes += a;
  }
  CHECK(passes >= 10);
  CHECK(passes < static_cast<int>(corpus.size()));

  auto lag = fixtures::lagrangian_example();
  auto L = lag.model;
  auto closed = InfDefPair::make(lag, {fixtures::field(L, "u"), fixtures::field(L, "v")}, DifferentialForm(L, 2));
  auto twisted = InfDefPair::make(lag, {fixtures::field(L, "v"), ScalarField(L)}, DifferentialForm(L, 2));
  CHECK(check_infdef(closed, lag, plan(8)).pass);
  CHECK(infdef_general_check(closed, lag, plan(8)).pass);
  CHECK_FALSE(check_infdef(twisted, lag, plan(8)).pass);
  CHECK_FALSE(infdef_general_check(twisted, lag, plan(8)).pass);
}

TEST_CASE("upsilon image") {
  auto c = fixtures::main_example();
  auto Y = c.model;
  auto N = fixtures::t4();
  const auto wN = fixtures::omega4(N), FN = fixtures::F4(N);
  const auto dq = DifferentialForm::dx(Y, 4);
  CHECK(upsilon_image_check(3.0 * dq, wN, FN).pass);
  // rho = d_E g has zero q-average
  const auto g = fixtures::field(Y, "cos(2*pi*(x1 + q))*sin(2*pi*y2)");
  CHECK(upsilon_image_check(VectorField::basis(Y, 4).apply(g) * dq, wN, FN).pass);
  const auto v = upsilon_image_check(fixtures::field(Y, "cos(2*pi*x1)^2") * dq, wN, FN);
  CHECK_FALSE(v.passed("image_criterion"));
  CHECK_FALSE(v.passed("lie_reformulation"));

  std::mt19937_64 rng(15);
  for (int i = 0; i < 12; ++i) {
    const auto rho = fixtures::random_field(Y, rng, 2, 1);
    const auto w = upsilon_image_check(rho * dq, wN, FN);
    CHECK(w.passed("image_criterion") == w.passed("lie_reformulation"));
  }
  CHECK_THROWS_AS(upsilon_image_check(form(Y, "dx1", 1), wN, FN), DegreeError);
}

TEST_CASE("kernel of upsilon") {
  auto c = fixtures::main_example();
  auto Y = c.model;
  auto N = fixtures::t4();
  std::mt19937_64 rng(16);
  for (int i = 0; i < 10; ++i) {
    // generators of q-independent functions have r = 0
    const auto p = hamiltonian_generator(q_free_field(N, Y, rng), c);
    CHECK(upsilon(p).is_zero());
    CHECK(check_infdef(p, c, plan(8)).pass);
    // any generator lands in the image
    const auto h = hamiltonian_generator(fixtures::random_field(Y, rng, 3, 1), c);
    CHECK(upsilon_image_check(upsilon(h), fixtures::omega4(N), fixtures::F4(N)).pass);
  }
}

TEST_CASE("truncated complex against the dense oracle") {
  auto sf = fixtures::space_filling_t4();
  for (int T : {0, 1}) {
    const auto s = complex_slice(sf, T);
    const auto o = oracles::space_filling_h1(oracles::standard_pair(), T);
    CHECK(s.ker_d1 == o.ker_d1);
    CHECK(s.rank_d0 == o.rank_d0);
    CHECK(s.h1 == o.h1);
    CHECK(o.h1 == 4);
    CHECK(s.d1_d0_residual <= 1e-10);
    CHECK(s.cocycle_residual <= 1e-10);
    CHECK(s.c0_basis.size() == static_cast<std::size_t>(s.dense_d0().cols()));
    CHECK(s.c1_basis.size() == static_cast<std::size_t>(s.dense_d1().cols()));
  }
}

TEST_CASE("oracle frame is of type (1,1)") {
  const auto p = oracles::standard_pair();
  const Eigen::Matrix4d I = p.I();
  CHECK((I * I + Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
  for (const auto& b : oracles::type11_frame()) CHECK((I.transpose() * b * I - b).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("truncated complex on the main example") {
  auto c = fixtures::main_example();
  const auto s0 = complex_slice(c, 0);
  // constants: one rho slot plus the four (1,1) forms on the torus
  CHECK(s0.h1 == 5);
  const auto s1 = complex_slice(c, 1);
  CHECK(s1.d1_d0_residual <= 1e-10);
  CHECK(s1.cocycle_residual <= 1e-10);
  CHECK(s1.h1 >= 0);
  CHECK(s1.rank_d0 <= static_cast<Eigen::Index>(s1.c0_basis.size()));
  CHECK_THROWS_AS(complex_slice(shear_stage(), 1), ModelError);
}
