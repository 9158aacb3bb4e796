#include <benchmark/benchmark.h>

#include <cmath>

#include "branelab/branelab.hpp"

using namespace branelab;

namespace {

ModelPtr torus4() {
  return ManifoldModel::make({{"x1", CoordKind::Circle}, {"x2", CoordKind::Circle},
                              {"y1", CoordKind::Circle}, {"y2", CoordKind::Circle}});
}

ModelPtr stage() {
  return ManifoldModel::make({{"x1", CoordKind::Circle}, {"x2", CoordKind::Line},
                              {"y1", CoordKind::Line}, {"y2", CoordKind::Line}});
}

BraneCandidate space_filling() {
  auto N = torus4();
  std::vector<VectorField> g;
  for (std::size_t i = 0; i < 4; ++i) g.push_back(VectorField::basis(N, i));
  return BraneCandidate("t4", parse_form(N, "dx1^dy2 + dy1^dx2", 2), parse_form(N, "dx1^dx2 - dy1^dy2", 2),
                        Distribution(N, {}), Distribution(N, g));
}

void BM_field_mul(benchmark::State& state) {
  auto N = torus4();
  const auto a = parse_field(N, "cos(2*pi*x1)*sin(2*pi*y2) + 0.5*cos(2*pi*(x2 - y1)) + sin(4*pi*x1)");
  const auto b = parse_field(N, "sin(2*pi*x2)*cos(2*pi*y1) - 0.25*cos(2*pi*(x1 + y2)) + 1");
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
}
BENCHMARK(BM_field_mul);

void BM_ext_d(benchmark::State& state) {
  auto Y = ManifoldModel::with_circle(torus4(), "q");
  const auto w = parse_form(Y, "cos(2*pi*(x1 + q))*dx1^dy1 + sin(2*pi*x2)*cos(2*pi*q)*dx2^dy2 + sin(2*pi*y1)*dq^dx1",
                            2);
  for (auto _ : state) benchmark::DoNotOptimize(ext_d(w));
}
BENCHMARK(BM_ext_d);

void BM_flow(benchmark::State& state) {
  auto N = stage();
  auto Y = ManifoldModel::with_circle(N, "q");
  const double lambda = std::sqrt(2.0) - 1.0;
  GraphDeformation g(parse_form(N, "dx1^dy2 + dy1^dx2", 2), lambda * ScalarField::coordinate(Y, 3));
  SamplePlan p;
  p.count = static_cast<std::size_t>(state.range(0));
  const auto pts = p.points(*N);
  for (auto _ : state) benchmark::DoNotOptimize(flow(g, 0.0, 1.0, pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_flow)->Arg(16)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_complex_slice(benchmark::State& state) {
  const auto c = space_filling();
  const int T = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(complex_slice(c, T));
}
BENCHMARK(BM_complex_slice)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
