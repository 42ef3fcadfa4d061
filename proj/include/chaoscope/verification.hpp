#pragma once

// Acceptance checks for the built-in construction. Each check is a function
// returning a CheckResult; the acceptance test binary and `chaoscope verify`
// both go through run_check().
//
// The `oracle` namespace rebuilds cycle images by hand from the materialized
// lower graph. It does not touch PathExpr, so it can cross-check the
// symbolic side.

#include <chrono>
#include <deque>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chaoscope/bigint.hpp"
#include "chaoscope/bouquet.hpp"
#include "chaoscope/chaos_analysis.hpp"
#include "chaoscope/cover_dsl.hpp"
#include "chaoscope/graph_core.hpp"
#include "chaoscope/limit_dynamics.hpp"

namespace chaoscope::verify {

namespace oracle {

/// Vertices of cycle `cycle` in a bouquet graph, found by leaving the base
/// through `first` and following the unique successor until the base comes
/// back. Includes both base endpoints.
inline std::vector<graph::VertexId> trace_cycle(const graph::MaterializedGraph& g, graph::VertexId first)
{
  std::vector<graph::VertexId> out{0};
  if (!g.has_edge(0, first))
    throw graph::GraphError("no edge from the base into vertex " + std::to_string(first));
  graph::VertexId v = first;
  while (v != 0) {
    out.push_back(v);
    const auto succ = g.out_edges(v);
    if (succ.size() != 1)
      throw graph::GraphError("cycle vertex " + std::to_string(v) + " has out-degree " + std::to_string(succ.size()));
    v = succ[0].to;
    if (out.size() > g.vertex_count())
      throw graph::GraphError("walk from vertex " + std::to_string(first) + " never returns to the base");
  }
  out.push_back(0);
  return out;
}

/// Cycles of a bouquet graph in layout order (cycle i starts right after
/// the last vertex of cycle i-1).
inline std::vector<std::vector<graph::VertexId>> trace_all_cycles(const graph::MaterializedGraph& g)
{
  std::vector<std::vector<graph::VertexId>> cycles;
  graph::VertexId next = 1;
  while (next < g.vertex_count()) {
    cycles.push_back(trace_cycle(g, next));
    next = static_cast<graph::VertexId>(next + cycles.back().size() - 2);
  }
  return cycles;
}

/// The level-(n+1) cycle images written out over the traced cycles of the
/// level-n graph, following the construction literally: for n = 0 one loop
/// image of ten base edges; for n >= 1
///   cycle 1:     for j = 1..k: j base edges then two laps of cycle 1;
///                then one base edge, two laps of each of cycles 2..n, one base edge
///   cycle i<=n:  one base edge, two laps of each of cycles i..n, one base edge
///   cycle n+1:   (n+2)^2 * (sum of level-n cycle lengths) base edges
inline std::vector<std::vector<graph::VertexId>> image_paths(const graph::MaterializedGraph& lower, std::size_t n)
{
  std::vector<std::vector<graph::VertexId>> images;
  if (n == 0) {
    images.emplace_back(11, 0);
    return images;
  }
  const auto cycles = trace_all_cycles(lower);
  if (cycles.size() != n)
    throw graph::GraphError("expected " + std::to_string(n) + " cycles, traced " + std::to_string(cycles.size()));
  std::uint64_t total = 0;
  for (const auto& c : cycles)
    total += c.size() - 1;
  const std::uint64_t k = 2 * (1 + total);

  auto edges = [](std::vector<graph::VertexId>& path, std::uint64_t count) { path.insert(path.end(), count, 0); };
  auto lap = [](std::vector<graph::VertexId>& path, const std::vector<graph::VertexId>& cycle) {
    path.insert(path.end(), cycle.begin() + 1, cycle.end());
  };

  for (std::size_t i = 1; i <= n + 1; ++i) {
    std::vector<graph::VertexId> path{0};
    if (i == 1) {
      for (std::uint64_t j = 1; j <= k; ++j) {
        edges(path, j);
        lap(path, cycles[0]);
        lap(path, cycles[0]);
      }
      edges(path, 1);
      for (std::size_t c = 2; c <= n; ++c) {
        lap(path, cycles[c - 1]);
        lap(path, cycles[c - 1]);
      }
      edges(path, 1);
    } else if (i <= n) {
      edges(path, 1);
      for (std::size_t c = i; c <= n; ++c) {
        lap(path, cycles[c - 1]);
        lap(path, cycles[c - 1]);
      }
      edges(path, 1);
    } else {
      edges(path, (n + 2) * (n + 2) * total);
    }
    images.push_back(std::move(path));
  }
  return images;
}

/// Nonnegative combinations of three generators, by nested loops.
inline bool representable(std::uint64_t value, std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
  for (std::uint64_t x = 0; x * a <= value; ++x) {
    for (std::uint64_t y = 0; x * a + y * b <= value; ++y) {
      if ((value - x * a - y * b) % c == 0)
        return true;
    }
  }
  return false;
}

} // namespace oracle

// ---------------------------------------------------------------------------

struct CheckResult
{
  int id = 0;
  std::string title;
  bool passed = false;
  std::vector<std::string> notes;
  double seconds = 0;
  nlohmann::json data = nlohmann::json::object();
};

struct Options
{
  std::uint64_t seed = 0;
  BigInt scan_budget = default_scan_budget;
  BigInt vertex_budget = default_vertex_budget;
  BigInt li_yorke_horizon = 10'000;
  double min_separation_rate = 0.9;
};

/// Shared materialized levels 0..3 so that checks 1-3 build them once.
class Workbench
{
public:
  explicit Workbench(Options options = {}) : options_(std::move(options)) {}

  const Options& options() const { return options_; }

  const MaterializedLevel& level(std::size_t n)
  {
    while (levels_.size() <= n) {
      const std::size_t next = levels_.size();
      graph::GraphPtr lower = next == 0 ? nullptr : levels_.back().graph;
      levels_.push_back(materialize_level(builtin_tower(), next, options_.vertex_budget, lower));
    }
    return levels_[n];
  }

private:
  Options options_;
  std::deque<MaterializedLevel> levels_; // stable references across growth
};

namespace detail {

inline std::string str(const BigInt& v) { return to_decimal(v); }

// Check 1: length table against literals and against hand-built image paths.
inline CheckResult length_table(Workbench& wb)
{
  CheckResult r{1, "length table"};
  const auto& tower = builtin_tower();
  const std::vector<std::vector<std::string>> expected_lengths{
      {"10"}, {"695", "90"}, {"3421640", "182", "12560"}};
  const std::vector<std::string> expected_k{"22", "1572"};
  bool ok = true;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t i = 1; i <= n; ++i) {
      const BigInt got = tower.cycle_length(n, i);
      if (str(got) != expected_lengths[n - 1][i - 1]) {
        ok = false;
        r.notes.push_back("|c_" + std::to_string(n) + "," + std::to_string(i) + "| = " + str(got));
      }
    }
  }
  for (std::size_t n = 1; n <= 2; ++n) {
    if (str(tower.spec(n)->k_value) != expected_k[n - 1]) {
      ok = false;
      r.notes.push_back("k_" + std::to_string(n) + " = " + str(tower.spec(n)->k_value));
    }
  }

  nlohmann::json counted = nlohmann::json::array();
  for (std::size_t n = 0; n < 3; ++n) {
    const auto& lower = wb.level(n);
    const auto& upper = wb.level(n + 1);
    const auto images = oracle::image_paths(*lower.graph, n);
    const auto upper_cycles = oracle::trace_all_cycles(*upper.graph);
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t i = 0; i < images.size(); ++i) {
      const auto& img = images[i];
      const std::uint64_t edge_count = img.size() - 1;
      row.push_back(edge_count);
      if (!graph::is_path(*lower.graph, graph::VertexPath{img})) {
        ok = false;
        r.notes.push_back("hand-built image of c_" + std::to_string(n + 1) + "," + std::to_string(i + 1) +
                          " is not a walk in G_" + std::to_string(n));
      }
      if (BigInt(edge_count) != tower.cycle_length(n + 1, i + 1)) {
        ok = false;
        r.notes.push_back("counted " + std::to_string(edge_count) + " edges for c_" + std::to_string(n + 1) + "," +
                          std::to_string(i + 1));
      }
      if (i < upper_cycles.size()) {
        std::vector<graph::VertexId> mapped;
        mapped.reserve(upper_cycles[i].size());
        for (auto v : upper_cycles[i])
          mapped.push_back((*upper.cover_down)(v));
        if (mapped != img) {
          ok = false;
          r.notes.push_back("materialized map of c_" + std::to_string(n + 1) + "," + std::to_string(i + 1) +
                            " differs from the hand-built image");
        }
      } else {
        ok = false;
        r.notes.push_back("G_" + std::to_string(n + 1) + " is missing a cycle");
      }
    }
    counted.push_back(row);
  }
  // k_n from counted lengths
  for (std::size_t n = 1; n <= 2; ++n) {
    std::uint64_t sum = 0;
    for (const auto& c : counted[n - 1])
      sum += c.get<std::uint64_t>();
    if (std::to_string(2 * (1 + sum)) != expected_k[n - 1]) {
      ok = false;
      r.notes.push_back("counted k_" + std::to_string(n) + " = " + std::to_string(2 * (1 + sum)));
    }
  }
  r.data["counted_lengths"] = counted;
  r.passed = ok;
  return r;
}

// Check 2: bd-cover axioms on the materialized covers G_1 -> G_0 .. G_3 -> G_2.
inline CheckResult cover_axioms(Workbench& wb)
{
  CheckResult r{2, "bd-cover axioms"};
  std::size_t total = 0;
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto& lvl = wb.level(n);
    const auto& cover = *lvl.cover_down;
    auto es_src = graph::validate_edge_surjective(cover.source());
    auto es_dst = graph::validate_edge_surjective(cover.target());
    auto hom = graph::validate_homomorphism(cover);
    auto bid = graph::validate_bidirectional(cover);
    const std::size_t count = es_src.size() + es_dst.size() + hom.size() + bid.size();
    total += count;
    r.data["phi_" + std::to_string(n - 1)] = {{"source_vertices", cover.source().vertex_count()},
                                              {"edge_surjective", es_src.size() + es_dst.size()},
                                              {"homomorphism", hom.size()},
                                              {"bidirectional", bid.size()}};
    for (auto* list : {&es_src, &es_dst, &hom, &bid}) {
      for (std::size_t i = 0; i < list->size() && i < 3; ++i)
        r.notes.push_back("phi_" + std::to_string(n - 1) + ": " + graph::describe((*list)[i]));
    }
  }
  r.passed = total == 0;
  return r;
}

// Check 3: project_addr against the materialized vertex maps.
inline CheckResult projection_oracle(Workbench& wb)
{
  CheckResult r{3, "projection agrees with materialized maps"};
  const auto& tower = builtin_tower();
  std::size_t checked = 0, mismatched = 0;
  auto check = [&](const MaterializedLevel& lvl, const VertexLayout& lower, graph::VertexId v) {
    ++checked;
    const VertexAddr a = lvl.layout.addr_of(v);
    const VertexAddr p = project_addr(tower, a);
    const auto expected = (*lvl.cover_down)(v);
    if (lower.id_of(p) != expected) {
      if (++mismatched <= 3)
        r.notes.push_back("project(" + to_string(a) + ") = " + to_string(p) + ", map gives " +
                          to_string(lower.addr_of(expected)));
    }
  };
  for (std::size_t n = 1; n <= 2; ++n) {
    const auto& lvl = wb.level(n);
    const auto& lower = wb.level(n - 1).layout;
    for (graph::VertexId v = 0; v < lvl.graph->vertex_count(); ++v)
      check(lvl, lower, v);
  }
  const std::size_t exhaustive = checked;
  const auto& lvl3 = wb.level(3);
  const auto& lower3 = wb.level(2).layout;
  std::mt19937_64 rng(derive_seed(wb.options().seed, 3));
  std::uniform_int_distribution<graph::VertexId> pick(0, static_cast<graph::VertexId>(lvl3.graph->vertex_count() - 1));
  for (int s = 0; s < 10'000; ++s)
    check(lvl3, lower3, pick(rng));
  r.data = {{"exhaustive_levels_1_2", exhaustive}, {"sampled_level_3", checked - exhaustive}, {"mismatches", mismatched}};
  r.passed = mismatched == 0;
  return r;
}

// Check 4: the fixed point stays at the base.
inline CheckResult fixed_point_check(Workbench&)
{
  CheckResult r{4, "fixed point"};
  const auto& tower = builtin_tower();
  const PointHandle p = fixed_point(12);
  bool ok = true;
  for (const BigInt delta : {BigInt(1), BigInt(1'000'000), BigInt(1'000'000'000'000LL)}) {
    const auto col = column_of(tower, step(tower, p, delta), 12);
    const bool all_base = std::all_of(col.begin(), col.end(), [](const VertexAddr& a) { return a.is_base(); });
    if (!all_base) {
      ok = false;
      r.notes.push_back("delta " + str(delta) + " left the base");
    }
  }
  r.passed = ok;
  return r;
}

// Check 5: stepping forward then back restores the handle and its column.
inline CheckResult homeomorphism(Workbench& wb)
{
  CheckResult r{5, "step round trip"};
  const auto& tower = builtin_tower();
  HandleSampler sampler(tower, 8, 1'000'000, derive_seed(wb.options().seed, 5));
  std::size_t failures = 0, moved = 0;
  for (int s = 0; s < 10'000; ++s) {
    const PointHandle h = sampler.next();
    const BigInt delta = sampler.uniform(1, 1'000'000);
    const PointHandle forward = step(tower, h, delta);
    const PointHandle back = step(tower, forward, -delta);
    const auto before = column_of(tower, h, 8);
    if (column_of(tower, forward, 8) != before)
      ++moved;
    if (!(back == h) || column_of(tower, back, 8) != before) {
      if (++failures <= 3)
        r.notes.push_back("round trip failed for " + to_string(h.seed) + " delta " + str(delta));
    }
  }
  r.data = {{"handles", 10'000}, {"failures", failures}, {"column_changed_after_forward_step", moved}};
  r.passed = failures == 0 && moved == 10'000;
  if (moved != 10'000)
    r.notes.push_back(std::to_string(10'000 - moved) + " handles did not move");
  return r;
}

// Check 6: occurrence gaps, prefixes and suffixes of c_{1,1} copies.
inline CheckResult mixing_claims(Workbench& wb)
{
  CheckResult r{6, "mixing claims"};
  const auto& tower = builtin_tower();
  const auto one = mixing_gap_report(tower, 1, 1, wb.options().scan_budget);
  const auto two = mixing_gap_report(tower, 1, 2, wb.options().scan_budget);
  bool ok = true;

  std::set<BigInt> want_one{0};
  for (int g = 2; g <= 22; ++g)
    want_one.insert(g);
  if (one.gap_set() != want_one) {
    ok = false;
    r.notes.push_back("j=1 gap set differs from {0} u {2..22}");
  }
  const auto gaps_two = two.gap_set();
  std::vector<int> required{0, 2, 3};
  for (int g = 5; g <= 100; ++g)
    required.push_back(g);
  for (int g : required) {
    if (!gaps_two.count(g)) {
      ok = false;
      r.notes.push_back("j=2 gap " + std::to_string(g) + " not realized");
    }
  }
  for (const auto* rep : {&one, &two}) {
    const std::string tag = "j=" + std::to_string(rep->depth);
    if (!rep->prefix_ok) {
      ok = false;
      r.notes.push_back(tag + " prefix is not j base edges followed by c_1,1");
    }
    if (!rep->suffix_ok) {
      ok = false;
      r.notes.push_back(tag + " trailing gap " + str(rep->occurrences.suffix.edges) + " exceeds " +
                        str(rep->suffix_bound));
    }
    std::string missing;
    for (const auto& g : rep->missing_gaps)
      missing += (missing.empty() ? "" : ",") + str(g);
    r.notes.push_back(tag + ": " + str(rep->occurrences.copy_count) + " copies, gaps missing from [0," +
                      str(rep->k_bound) + "]: {" + missing + "}");
  }
  r.data = {{"j1", to_json(one)}, {"j2", to_json(two)}};
  r.passed = ok;
  return r;
}

// Check 7: the return-length semigroup is cofinite.
inline CheckResult semigroup(Workbench& wb)
{
  CheckResult r{7, "cofinite return lengths"};
  const auto rep = mixing_gap_report(builtin_tower(), 1, 1, wb.options().scan_budget);
  const std::set<BigInt> returns(rep.return_lengths.begin(), rep.return_lengths.end());
  bool ok = true;
  for (int g : {10, 12, 13}) {
    if (!returns.count(g)) {
      ok = false;
      r.notes.push_back("return length " + std::to_string(g) + " not realized");
    }
  }
  const std::vector<std::uint64_t> gens{10, 12, 13};
  const auto frob = frobenius_number(gens);
  if (!frob || *frob < 0) {
    r.notes.push_back("semigroup is not cofinite");
    r.passed = false;
    return r;
  }
  const auto bound = static_cast<std::uint64_t>(*frob);
  if (oracle::representable(bound, 10, 12, 13)) {
    ok = false;
    r.notes.push_back("the computed bound itself is representable");
  }
  std::size_t bad = 0;
  for (std::uint64_t v = bound + 1; v <= bound + 1000; ++v)
    bad += !oracle::representable(v, 10, 12, 13);
  if (bad) {
    ok = false;
    r.notes.push_back(std::to_string(bad) + " values above the bound are not representable");
  }
  r.notes.push_back("largest non-representable value " + std::to_string(bound));
  r.data = {{"generators", gens}, {"frobenius", bound}, {"checked_range", {bound + 1, bound + 1000}}};
  r.passed = ok;
  return r;
}

// Check 8: every window of 700 steps brings the level-2 coordinate home.
inline CheckResult proximality(Workbench& wb)
{
  CheckResult r{8, "proximality windows"};
  const auto& tower = builtin_tower();
  const auto corpus = sample_handles(tower, 8, 7000, derive_seed(wb.options().seed, 8), 100);
  std::vector<std::pair<BigInt, BigInt>> windows;
  for (int w = 0; w < 10; ++w)
    windows.emplace_back(700 * w, 700);
  std::size_t hits = 0, total = 0;
  BigInt longest_wait = 0;
  for (const auto& h : corpus) {
    for (const auto& hit : proximal_certificate(tower, h, 2, windows)) {
      ++total;
      if (hit.first_hit) {
        ++hits;
        longest_wait = std::max(longest_wait, BigInt(*hit.first_hit - hit.start));
      } else if (r.notes.size() < 3) {
        r.notes.push_back("no base hit for " + to_string(h.seed) + " in window at " + str(hit.start));
      }
    }
  }
  r.data = {{"handles", corpus.size()}, {"windows", total}, {"hits", hits}, {"longest_wait", str(longest_wait)}};
  r.passed = hits == total;
  return r;
}

// Check 9: Li-Yorke witnesses for random pairs.
inline CheckResult li_yorke(Workbench& wb)
{
  CheckResult r{9, "Li-Yorke sampling"};
  const auto& tower = builtin_tower();
  const BigInt horizon = wb.options().li_yorke_horizon;
  std::size_t proximal = 0, separated = 0, pairs = 0, both_quiet = 0;
  nlohmann::json misses = nlohmann::json::array();
  for (std::uint64_t k = 0; pairs < 100; ++k) {
    const std::uint64_t seed = derive_seed(wb.options().seed ^ 0x9, k);
    HandleSampler sampler(tower, 8, horizon, seed);
    const PointHandle a = sampler.next();
    const PointHandle b = sampler.next();
    if (!distance(tower, a, b).is_exact())
      continue;
    ++pairs;
    auto rep = li_yorke_test(tower, a, b, horizon, 2, 3);
    rep.seed = seed;
    proximal += rep.proximal.has_value();
    separated += rep.separation.has_value();
    auto quiet = [&](const PointHandle& h) {
      const auto segs = segments_of(tower, h, 0, horizon + 1, 3);
      return segs.size() == 1 && segs[0].is_base();
    };
    both_quiet += quiet(a) && quiet(b);
    if ((!rep.proximal || !rep.separation) && misses.size() < 20)
      misses.push_back(to_json(rep));
  }
  r.data = {{"pairs", pairs},
            {"proximal", proximal},
            {"separated", separated},
            {"both_at_base_through_level_3", both_quiet},
            {"misses", misses}};
  r.notes.push_back("proximal " + std::to_string(proximal) + "/100, separated " + std::to_string(separated) + "/100");
  r.notes.push_back(std::to_string(both_quiet) +
                    " pairs have both level-3 coordinates at the base for the whole horizon");
  r.data["horizon"] = str(horizon);
  r.data["min_separation_rate"] = wb.options().min_separation_rate;
  r.passed = proximal == pairs && static_cast<double>(separated) >= wb.options().min_separation_rate * pairs;
  return r;
}

/// Window after which the level-(i+1) coordinate of a degree-i handle is
/// certain to have visited cycle i+1: the end of the next c_{M-1,i+1} run in
/// the spine cycle's image. Empty when no such run remains.
inline std::optional<BigInt> encounter_window(const CoverTower& tower, const PointHandle& h)
{
  const std::size_t top = h.spine_level;
  const std::size_t i = h.seed.cycle;
  if (h.is_fixed() || top < 2 || i + 1 > top - 1)
    return std::nullopt;
  const BigInt pos = h.seed.position + h.time;
  const auto& formula = tower.image_formula(top - 1, i);
  const auto start = formula.next_run_of(i + 1, pos);
  if (!start)
    return std::nullopt;
  return *start + tower.cycle_length(top - 1, i + 1) - pos;
}

// Check 10: degree monotonicity, stability and the window estimate.
inline CheckResult degree_properties(Workbench& wb)
{
  CheckResult r{10, "degree properties"};
  const auto& tower = builtin_tower();
  bool ok = true;

  std::size_t monotone_failures = 0;
  const auto sample = sample_handles(tower, 8, 1, derive_seed(wb.options().seed, 10), 10'000);
  for (const auto& h : sample) {
    const auto column = column_of(tower, h, 8);
    DegreeValue previous = DegreeValue::infinite();
    for (std::size_t n = 0; n <= 8; ++n) {
      const DegreeValue estimate = degree_of_column(tower, h, n);
      const bool rises = previous < estimate;
      const bool level_order = n > 0 && DegreeValue::of(column[n - 1]) < DegreeValue::of(column[n]) &&
                               !column[n].is_base();
      if (rises || level_order) {
        if (++monotone_failures <= 3)
          r.notes.push_back("degree not monotone in depth for " + to_string(h.seed));
        break;
      }
      previous = estimate;
    }
  }
  ok = ok && monotone_failures == 0;

  const auto corpus = sample_handles(tower, 8, 1, derive_seed(wb.options().seed, 11), 100);
  const auto stability = degree_stability_check(tower, corpus);
  ok = ok && stability.passed() && stability.checked > 0;
  for (std::size_t i = 0; i < stability.failures.size() && i < 3; ++i)
    r.notes.push_back(stability.failures[i]);

  std::size_t window_checked = 0, window_skipped = 0, window_failures = 0;
  for (const auto& h : corpus) {
    const DegreeValue d = degree_of_column(tower, h, 8);
    const auto window = d.is_infinite() ? std::nullopt : encounter_window(tower, h);
    if (!window) {
      ++window_skipped;
      continue;
    }
    ++window_checked;
    const std::size_t i = *d.index;
    const DegreeValue got = degree_window_min(tower, h, i + 1, 0, *window, i + 1);
    if (got.is_infinite() || *got.index > i + 1) {
      if (++window_failures <= 3)
        r.notes.push_back("window minimum " + to_string(got) + " for degree " + std::to_string(i) + " handle " +
                          to_string(h.seed));
    }
  }
  ok = ok && window_failures == 0 && window_checked > 0;
  r.notes.push_back("stability checked " + std::to_string(stability.checked) + ", skipped " +
                    std::to_string(stability.skipped) + "; window estimate checked " +
                    std::to_string(window_checked) + ", skipped " + std::to_string(window_skipped));
  r.data = {{"monotone_sample", sample.size()},
            {"monotone_failures", monotone_failures},
            {"stability_checked", stability.checked},
            {"stability_skipped", stability.skipped},
            {"invariance_checked", stability.invariance_checked},
            {"stability_failures", stability.failures.size()},
            {"window_checked", window_checked},
            {"window_skipped", window_skipped},
            {"window_failures", window_failures}};
  r.passed = ok;
  return r;
}

/// Single-edit corruptions of the built-in document, each of which must be
/// refused by the parser or the validator.
inline std::vector<std::pair<std::string, std::string>> mutant_edits()
{
  return {
      {"c1[10] := 10 e;", "c1[10] := 10 c1;"},
      {"c1[10] := 10 e;", "c1[11] := 10 e;"},
      {"level 2 {", "level 3 {"},
      {"c1[695] := sum(j=1..k){ j e + 2 c1 } + e + e;", "c1[695] := sum(j=1..k){ j e + 2 c1 } + e + c1;"},
      {"c2[90] := 90 e;", "c2[90] := 90 e + c3;"},
      {"c2[182] := e + 2 c2 + e;", "c2[182] := 2 c2 + e;"},
      {"mode bouquet", "mode materialized"},
      {"c3[12560] := 12560 e;", "c4[12560] := 12560 e;"},
      {"c1[695] := sum(j=1..k)", "c1[695] := sum(j=5..1)"},
      {"c2[182] := e + 2 c2 + e;", "c2[182] := e + 0 c2 + e;"},
      {"c1[10] := 10 e;", "c1[10] := 10 e"},
      {"level 1 {", "level 0 {"},
      {"c1[10] := 10 e;", "c1[10] := 10 x;"},
      {"c1[695]", "c1[694]"},
      {"  c2[90] := 90 e;\n", ""},
      {"cover builtin mode", "cover mode"},
      {"c1[695] := sum(j=1..k){ j e + 2 c1 }", "c1[695] := sum(j=1..k){ j e + 2 c9 }"},
      {"c1[10] := 10 e;", "c1[10] := 0 e;"},
      {"version 1", "version x"},
      {"c1[10] := 10 e;", "c1[10] := 10 e;\n  c1[10] := 10 e;"},
  };
}

// Check 11: the DSL form of the built-in construction.
inline CheckResult dsl(Workbench&)
{
  CheckResult r{11, "cover DSL"};
  bool ok = true;
  const std::string text = dsl::builtin_document_text(5);
  dsl::CoverDocument doc;
  try {
    doc = dsl::parse(text);
  } catch (const dsl::DslError& e) {
    r.notes.push_back(std::string("built-in document does not parse: ") + e.what());
    return r;
  }
  const auto violations = dsl::validate_document(doc);
  if (!violations.empty()) {
    ok = false;
    r.notes.push_back("built-in document: " + dsl::describe(violations.front()));
  }
  if (!dsl::builtin_equivalence(doc, 5)) {
    ok = false;
    r.notes.push_back("built-in document differs from the generator");
  }
  const std::string once = dsl::serialize(doc);
  const auto reparsed = dsl::parse(once);
  const bool round_trip = reparsed == doc && dsl::serialize(reparsed) == once;
  if (!round_trip) {
    ok = false;
    r.notes.push_back("serialization round trip is not stable");
  }

  std::size_t rejected = 0, applied = 0;
  nlohmann::json reasons = nlohmann::json::array();
  for (const auto& [from, to] : mutant_edits()) {
    std::string mutant = text;
    const auto at = mutant.find(from);
    if (at == std::string::npos) {
      r.notes.push_back("mutant anchor not found: " + from);
      reasons.push_back("anchor missing");
      continue;
    }
    ++applied;
    mutant.replace(at, from.size(), to);
    std::string reason;
    try {
      const auto v = dsl::validate_document(dsl::parse(mutant));
      if (!v.empty())
        reason = dsl::describe(v.front());
    } catch (const dsl::DslError& e) {
      reason = e.what();
    }
    if (reason.empty())
      r.notes.push_back("mutant accepted: '" + from + "' -> '" + to + "'");
    else
      ++rejected;
    reasons.push_back(reason.empty() ? "accepted" : reason);
  }
  ok = ok && rejected == 20 && applied == 20;
  r.data = {{"violations", violations.size()},
            {"round_trip", round_trip},
            {"mutants", applied},
            {"rejected", rejected},
            {"reasons", reasons}};
  r.passed = ok;
  return r;
}

} // namespace detail

inline constexpr int check_count = 11;

inline std::string check_title(int id)
{
  static const char* titles[] = {"length table",
                                 "bd-cover axioms",
                                 "projection agrees with materialized maps",
                                 "fixed point",
                                 "step round trip",
                                 "mixing claims",
                                 "cofinite return lengths",
                                 "proximality windows",
                                 "Li-Yorke sampling",
                                 "degree properties",
                                 "cover DSL"};
  if (id < 1 || id > check_count)
    throw std::out_of_range("no check " + std::to_string(id));
  return titles[id - 1];
}

/// Runs one check, timing it. Exceptions become failures with the message
/// in the notes.
inline CheckResult run_check(int id, Workbench& wb)
{
  using Fn = CheckResult (*)(Workbench&);
  static const Fn table[] = {detail::length_table,   detail::cover_axioms, detail::projection_oracle,
                             detail::fixed_point_check, detail::homeomorphism, detail::mixing_claims,
                             detail::semigroup,      detail::proximality,  detail::li_yorke,
                             detail::degree_properties, detail::dsl};
  const std::string title = check_title(id);
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = table[id - 1](wb);
  } catch (const std::exception& e) {
    r = CheckResult{id, title, false, {std::string("error: ") + e.what()}};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline nlohmann::json to_json(const CheckResult& r)
{
  return {{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"notes", r.notes}, {"data", r.data}};
}

} // namespace chaoscope::verify
