#include "branelab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

namespace branelab {

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                           43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101};

double radical_inverse(std::size_t index, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

std::vector<std::vector<double>> SamplePlan::points(const ManifoldModel& model) const {
  const std::size_t n = model.dim();
  if (n > std::size(kPrimes)) throw std::invalid_argument("sample plan supports at most 26 coordinates");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> shift(n);
  for (auto& s : shift) s = u(rng);
  std::vector<std::vector<double>> pts(count, std::vector<double>(n));
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = radical_inverse(k + 1, kPrimes[i]) + shift[i];
      v -= std::floor(v);
      if (auto it = pinned.find(i); it != pinned.end())
        pts[k][i] = it->second;
      else if (model.coords()[i].kind == CoordKind::Circle)
        pts[k][i] = v;
      else
        pts[k][i] = line_half_width * (2.0 * v - 1.0);
    }
  }
  return pts;
}

void for_each_index(std::size_t n, bool parallel, const std::function<void(std::size_t)>& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (!parallel || hw == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(hw, n);
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace branelab
