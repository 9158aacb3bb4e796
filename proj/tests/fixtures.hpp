#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "branelab/branelab.hpp"

namespace fixtures {

using namespace branelab;

inline ModelPtr r4() {
  return ManifoldModel::make({{"x1", CoordKind::Line}, {"x2", CoordKind::Line},
                              {"y1", CoordKind::Line}, {"y2", CoordKind::Line}});
}

inline ModelPtr t4() {
  return ManifoldModel::make({{"x1", CoordKind::Circle}, {"x2", CoordKind::Circle},
                              {"y1", CoordKind::Circle}, {"y2", CoordKind::Circle}});
}

/// S^1 x R^3 with x1 the circle; the stage for f = lambda*y2.
inline ModelPtr s1r3() {
  return ManifoldModel::make({{"x1", CoordKind::Circle}, {"x2", CoordKind::Line},
                              {"y1", CoordKind::Line}, {"y2", CoordKind::Line}});
}

inline DifferentialForm form(const ModelPtr& m, const std::string& text, int degree = -1) {
  return parse_form(m, text, degree);
}

inline ScalarField field(const ModelPtr& m, const std::string& text) { return parse_field(m, text); }

/// omega = dx1^dy2 + dy1^dx2 (the imaginary part).
inline DifferentialForm omega4(const ModelPtr& m) { return form(m, "dx1^dy2 + dy1^dx2", 2); }
/// F = dx1^dx2 - dy1^dy2 (the real part).
inline DifferentialForm F4(const ModelPtr& m) { return form(m, "dx1^dx2 - dy1^dy2", 2); }

/// Random trig polynomial with small integer frequencies on circle
/// coordinates and low powers on line coordinates.
inline ScalarField random_field(const ModelPtr& m, std::mt19937_64& rng, int terms = 4, int max_freq = 2,
                                int max_power = 2) {
  std::uniform_int_distribution<int> fk(-max_freq, max_freq), pk(0, max_power), ph(0, 1);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::vector<std::pair<Monomial, double>> t;
  for (int k = 0; k < terms; ++k) {
    Monomial mono{std::vector<int>(m->dim(), 0), std::vector<int>(m->dim(), 0),
                  ph(rng) ? Phase::Sin : Phase::Cos};
    for (std::size_t i = 0; i < m->dim(); ++i) {
      if (m->is_circle(i))
        mono.freqs[i] = fk(rng);
      else
        mono.powers[i] = pk(rng);
    }
    t.emplace_back(mono, c(rng));
  }
  return ScalarField::from_terms(m, t);
}

inline DifferentialForm random_form(const ModelPtr& m, int degree, std::mt19937_64& rng, int terms = 2) {
  DifferentialForm out(m, degree);
  const int n = static_cast<int>(m->dim());
  std::vector<int> idx(degree);
  // Enumerate increasing multi-indices and give each a random coefficient.
  std::function<void(int, int)> rec = [&](int pos, int start) {
    if (pos == degree) {
      out.add_term(idx, random_field(m, rng, terms));
      return;
    }
    for (int i = start; i < n; ++i) {
      idx[pos] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
  return out;
}

inline std::vector<double> random_point(const ModelPtr& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> p(m->dim());
  for (auto& v : p) v = u(rng);
  return p;
}

}  // namespace fixtures

namespace fixtures {

/// Y = T^4 x S^1 with q last.
inline ModelPtr t4q() { return ManifoldModel::with_circle(t4(), "q"); }

inline std::vector<VectorField> coordinate_fields(const ModelPtr& m, std::size_t from, std::size_t to) {
  std::vector<VectorField> out;
  for (std::size_t i = from; i < to; ++i) out.push_back(VectorField::basis(m, i));
  return out;
}

/// Product brane on T^4 x S^1: pullbacks of the T^4 pair, E = span(d/dq).
inline BraneCandidate main_example() {
  auto N = t4();
  auto Y = t4q();
  return BraneCandidate("main", omega4(N).extend_to(Y), F4(N).extend_to(Y),
                        Distribution(Y, {VectorField::basis(Y, 4)}), Distribution(Y, coordinate_fields(Y, 0, 4)));
}

inline BraneCandidate lagrangian_example() {
  auto Y = ManifoldModel::make({{"u", CoordKind::Line}, {"v", CoordKind::Line}});
  return BraneCandidate("lagrangian", DifferentialForm(Y, 2), DifferentialForm(Y, 2),
                        Distribution(Y, coordinate_fields(Y, 0, 2)), Distribution(Y, {}));
}

inline BraneCandidate space_filling_t4() {
  auto N = t4();
  return BraneCandidate("t4", omega4(N), F4(N), Distribution(N, {}), Distribution(N, coordinate_fields(N, 0, 4)));
}

}  // namespace fixtures
