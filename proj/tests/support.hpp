#pragma once

#include <deque>

#include "chaoscope/bouquet.hpp"

namespace testing_support {

// Materialized levels 0..n of the built-in tower, built once per process.
inline const chaoscope::MaterializedLevel& level(std::size_t n)
{
  static std::deque<chaoscope::MaterializedLevel> cache;
  while (cache.size() <= n) {
    const std::size_t next = cache.size();
    chaoscope::graph::GraphPtr lower = next == 0 ? nullptr : cache.back().graph;
    cache.push_back(chaoscope::materialize_level(chaoscope::builtin_tower(), next,
                                                 chaoscope::default_vertex_budget, lower));
  }
  return cache[n];
}

} // namespace testing_support
