#pragma once

#include <optional>

#include "branelab_tools/report.hpp"
#include "branelab_tools/scene.hpp"

namespace branelab::scene {

/// Command-line overrides; a set flag wins over the scene value.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;  // sample tolerance
  std::optional<int> steps;
  std::optional<std::size_t> q_grid;
  bool parallel = false;  // checks run concurrently; record order is unchanged
};

Settings effective_settings(const Scene& s, const RunOptions& opts);

/// Runs every check in order. Exceptions become failed records carrying
/// the message.
report::Report run(const Scene& scene, const RunOptions& opts = {}, const std::string& source = {});

report::CheckRecord run_check(const Scene& scene, const Settings& settings, const SceneCheck& check,
                              std::size_t index, bool parallel = false);

}  // namespace branelab::scene
