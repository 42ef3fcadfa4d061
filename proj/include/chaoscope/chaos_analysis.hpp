#pragma once

// Finite-horizon evidence for the chaotic properties of the construction:
// degrees, proximality certificates, Li-Yorke witnesses, the mixing gap
// claims and degree stability along orbits. Statements that only hold in the
// limit (no asymptotic pairs) are reported as theorem-derived verdicts next
// to whatever the scans actually witnessed; the two are never conflated.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaoscope/bigint.hpp"
#include "chaoscope/bouquet.hpp"
#include "chaoscope/graph_core.hpp"
#include "chaoscope/limit_dynamics.hpp"

namespace chaoscope {

/// splitmix64 step; gives each corpus task its own PRNG stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Degree

/// Cycle index of a vertex, +inf at the base.
struct DegreeValue
{
  std::optional<std::size_t> index; // empty = +inf

  static DegreeValue infinite() { return {}; }
  static DegreeValue finite(std::size_t i) { return {i}; }
  static DegreeValue of(const VertexAddr& a) { return a.is_base() ? infinite() : finite(a.cycle); }

  bool is_infinite() const { return !index.has_value(); }

  friend bool operator==(const DegreeValue&, const DegreeValue&) = default;
  friend bool operator<(const DegreeValue& a, const DegreeValue& b)
  {
    if (a.is_infinite())
      return false;
    return b.is_infinite() || *a.index < *b.index;
  }
};

inline std::string to_string(const DegreeValue& d) { return d.is_infinite() ? "inf" : std::to_string(*d.index); }

inline nlohmann::json to_json(const DegreeValue& d)
{
  return d.is_infinite() ? nlohmann::json("inf") : nlohmann::json(*d.index);
}

inline DegreeValue min_degree(const std::vector<VertexAddr>& column)
{
  DegreeValue out = DegreeValue::infinite();
  for (const auto& a : column)
    out = std::min(out, DegreeValue::of(a));
  return out;
}

/// Depth-limited estimate of deg(x): the minimum over levels 0..depth.
inline DegreeValue degree_of_column(const CoverTower& tower, const PointHandle& h, std::size_t depth)
{
  return min_degree(column_of(tower, h, depth));
}

/// Minimum degree of the level-n coordinate over times [from, from + window].
/// Stops as soon as the minimum drops to `stop_at`.
inline DegreeValue degree_window_min(const CoverTower& tower, const PointHandle& h, std::size_t level,
                                     const BigInt& from, const BigInt& window,
                                     std::optional<std::size_t> stop_at = std::nullopt)
{
  DegreeValue best = DegreeValue::infinite();
  walk_segments(tower, h, from, window + 1, level, [&](const Segment& s) {
    if (!s.is_base())
      best = std::min(best, DegreeValue::finite(s.cycle));
    return !(stop_at && !best.is_infinite() && *best.index <= *stop_at);
  });
  return best;
}

// ---------------------------------------------------------------------------
// Proximality

struct WindowHit
{
  BigInt start = 0;
  BigInt length = 0;
  std::optional<BigInt> first_hit; // absolute delta from the handle's time
};

/// For each window [start, start + length), the first delta whose level-m
/// coordinate is the base, i.e. d(T^delta x, p) <= 2^{-(m+1)}.
inline std::vector<WindowHit> proximal_certificate(const CoverTower& tower, const PointHandle& h, std::size_t level,
                                                   const std::vector<std::pair<BigInt, BigInt>>& windows)
{
  std::vector<WindowHit> out;
  for (const auto& [start, length] : windows) {
    WindowHit hit{start, length, std::nullopt};
    if (length > 0) {
      require_valid_time(tower, h, h.time + start + length - 1);
      const BigInt wait = next_base_time(tower, step(tower, h, start), level);
      if (wait < length)
        hit.first_hit = start + wait;
    }
    out.push_back(std::move(hit));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Li-Yorke pairs

struct Witness
{
  BigInt time = 0;
  DistanceValue distance;
};

struct LiYorkeReport
{
  PointHandle a;
  PointHandle b;
  BigInt horizon = 0;
  std::size_t proximal_level = 0;   // witness: columns agree on 0..proximal_level
  std::size_t separation_level = 0; // witness: columns differ at some level <= separation_level
  std::optional<Witness> proximal;
  std::optional<Witness> separation;
  std::optional<std::uint64_t> seed;

  double proximal_threshold() const { return std::ldexp(1.0, -static_cast<int>(proximal_level + 1)); }
  double separation_threshold() const { return std::ldexp(1.0, -static_cast<int>(separation_level)); }
};

namespace detail {

// First time in [0, horizon] at which the level coordinates of the two walks
// agree (want_agree) or differ (!want_agree).
inline std::optional<BigInt> first_relation(const std::vector<Segment>& sa, const std::vector<Segment>& sb,
                                            bool want_agree)
{
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const Segment& x = sa[i];
    const Segment& y = sb[j];
    const BigInt lo = std::max(x.start, y.start);
    const BigInt hi = std::min(BigInt(x.start + x.length), BigInt(y.start + y.length));
    if (lo < hi) {
      bool agree = false;
      if (x.is_base() && y.is_base())
        agree = true;
      else if (x.cycle == y.cycle && x.position - x.start == y.position - y.start)
        agree = true;
      if (agree == want_agree)
        return lo;
    }
    if (x.start + x.length <= y.start + y.length)
      ++i;
    else
      ++j;
  }
  return std::nullopt;
}

} // namespace detail

/// Searches times 0..horizon for a proximal witness (columns equal through
/// `proximal_level`) and a separation witness (columns differ at some level
/// <= `separation_level`). Both searches walk level segments, not single steps.
inline LiYorkeReport li_yorke_test(const CoverTower& tower, const PointHandle& a, const PointHandle& b,
                                   const BigInt& horizon, std::size_t proximal_level, std::size_t separation_level)
{
  LiYorkeReport rep{a, b, horizon, proximal_level, separation_level};
  auto witness_at = [&](const BigInt& t) {
    return Witness{t, distance(tower, step(tower, a, t), step(tower, b, t))};
  };
  {
    const auto sa = segments_of(tower, a, 0, horizon + 1, proximal_level);
    const auto sb = segments_of(tower, b, 0, horizon + 1, proximal_level);
    if (auto t = detail::first_relation(sa, sb, true))
      rep.proximal = witness_at(*t);
  }
  {
    const auto sa = segments_of(tower, a, 0, horizon + 1, separation_level);
    const auto sb = segments_of(tower, b, 0, horizon + 1, separation_level);
    if (auto t = detail::first_relation(sa, sb, false))
      rep.separation = witness_at(*t);
  }
  return rep;
}

inline nlohmann::json to_json(const LiYorkeReport& r)
{
  auto witness = [](const std::optional<Witness>& w) {
    if (!w)
      return nlohmann::json(nullptr);
    return nlohmann::json{{"time", to_decimal(w->time)}, {"distance", to_json(w->distance)}};
  };
  nlohmann::json out{{"a", to_json(r.a)},
                     {"b", to_json(r.b)},
                     {"horizon", to_decimal(r.horizon)},
                     {"proximal_level", r.proximal_level},
                     {"separation_level", r.separation_level},
                     {"proximal_threshold", r.proximal_threshold()},
                     {"separation_threshold", r.separation_threshold()},
                     {"proximal_witness", witness(r.proximal)},
                     {"separation_witness", witness(r.separation)}};
  if (r.seed)
    out["seed"] = *r.seed;
  return out;
}

// ---------------------------------------------------------------------------
// Pair classification

struct PairClassification
{
  enum class Verdict
  {
    ExpectedLiYorke,
    Identical,
    Fixed,
  };

  DegreeValue degree_a;
  DegreeValue degree_b;
  std::size_t depth = 0;
  Verdict verdict = Verdict::Identical;
  std::vector<std::string> citations;
  std::optional<LiYorkeReport> evidence;
};

inline std::string to_string(PairClassification::Verdict v)
{
  switch (v) {
  case PairClassification::Verdict::ExpectedLiYorke: return "expected-li-yorke";
  case PairClassification::Verdict::Identical: return "identical";
  case PairClassification::Verdict::Fixed: return "fixed";
  }
  return "unknown";
}

struct LiYorkeParams
{
  BigInt horizon = 10'000;
  std::size_t proximal_level = 2;
  std::size_t separation_level = 3;
};

/// Theorem-derived verdict for a pair plus optional empirical witnesses.
/// Degrees are depth-limited estimates at the shared spine depth.
inline PairClassification classify_pair(const CoverTower& tower, const PointHandle& a, const PointHandle& b,
                                        std::optional<LiYorkeParams> evidence = std::nullopt)
{
  PairClassification out;
  out.depth = std::min(a.spine_level, b.spine_level);
  out.degree_a = degree_of_column(tower, a, out.depth);
  out.degree_b = degree_of_column(tower, b, out.depth);
  const DistanceValue d = distance(tower, a, b);
  if (!d.is_exact()) {
    if (out.degree_a.is_infinite() && out.degree_b.is_infinite()) {
      out.verdict = PairClassification::Verdict::Fixed;
      out.citations.push_back("the fixed point is the only periodic point");
    } else {
      out.verdict = PairClassification::Verdict::Identical;
      out.citations.push_back("columns agree on every shared level");
    }
    return out;
  }
  out.verdict = PairClassification::Verdict::ExpectedLiYorke;
  out.citations.push_back("every orbit accumulates on the fixed point, so every pair is proximal");
  if (out.degree_a.is_infinite() || out.degree_b.is_infinite()) {
    out.citations.push_back("no point other than the fixed point is asymptotic to it");
  } else if (out.degree_a != out.degree_b) {
    const auto gap = std::max(*out.degree_a.index, *out.degree_b.index) - std::min(*out.degree_a.index, *out.degree_b.index);
    if (gap > 1)
      out.citations.push_back("asymptotic pairs have degrees differing by at most one");
    out.citations.push_back("points of different degree are never asymptotic");
  } else {
    out.citations.push_back("an asymptotic pair of equal degree must coincide");
  }
  if (evidence)
    out.evidence = li_yorke_test(tower, a, b, evidence->horizon, evidence->proximal_level, evidence->separation_level);
  return out;
}

inline nlohmann::json to_json(const PairClassification& c)
{
  nlohmann::json out{{"degree_a", to_json(c.degree_a)},
                     {"degree_b", to_json(c.degree_b)},
                     {"depth", c.depth},
                     {"verdict", to_string(c.verdict)},
                     {"citations", c.citations}};
  if (c.evidence)
    out["evidence"] = to_json(*c.evidence);
  return out;
}

// ---------------------------------------------------------------------------
// Mixing claims

struct MixingReport
{
  std::size_t lower_level = 0; // m
  std::size_t depth = 0;       // j
  OccurrenceReport occurrences;
  BigInt k_bound = 0;                // k_{m+j-1}
  std::vector<BigInt> missing_gaps;  // values in [0, k_bound] never realized
  bool prefix_ok = false;            // image starts with j*e + c_{m,1}
  BigInt suffix_bound = 0;           // k_{m+j-1} - j
  bool suffix_ok = false;
  std::vector<BigInt> return_lengths; // |c_{m,1}| + gap, ascending

  std::set<BigInt> gap_set() const
  {
    std::set<BigInt> out;
    for (const auto& [gap, count] : occurrences.gap_histogram)
      out.insert(gap);
    return out;
  }
};

/// Scans phi_{m+j,m}(c_{m+j,1}) for copies of c_{m,1} and checks the three
/// mixing claims: which gaps between consecutive copies occur, the j*e prefix,
/// and the bound on the trailing gap.
inline MixingReport mixing_gap_report(const CoverTower& tower, std::size_t m, std::size_t j,
                                      const BigInt& budget = default_scan_budget)
{
  if (m < 1 || j < 1)
    throw std::invalid_argument("mixing report needs m >= 1 and j >= 1");
  MixingReport rep;
  rep.lower_level = m;
  rep.depth = j;
  rep.occurrences = find_occurrences(tower, m, m + j, 1, 1, budget);
  rep.k_bound = tower.spec(m + j - 1)->k_value;
  const auto gaps = rep.gap_set();
  if (rep.k_bound <= budget) {
    for (BigInt g = 0; g <= rep.k_bound; ++g) {
      if (!gaps.count(g))
        rep.missing_gaps.push_back(g);
    }
  }
  rep.prefix_ok = rep.occurrences.copy_count > 0 && rep.occurrences.prefix.only_base_edges &&
                  rep.occurrences.prefix.edges == j;
  rep.suffix_bound = rep.k_bound - j;
  rep.suffix_ok = rep.occurrences.copy_count > 0 && rep.occurrences.suffix.edges <= rep.suffix_bound;
  const BigInt cycle_len = tower.cycle_length(m, 1);
  for (const auto& g : gaps)
    rep.return_lengths.push_back(cycle_len + g);
  return rep;
}

inline nlohmann::json to_json(const MixingReport& r)
{
  nlohmann::json missing = nlohmann::json::array();
  for (const auto& g : r.missing_gaps)
    missing.push_back(to_decimal(g));
  nlohmann::json returns = nlohmann::json::array();
  for (std::size_t i = 0; i < r.return_lengths.size() && i < 64; ++i)
    returns.push_back(to_decimal(r.return_lengths[i]));
  return {{"m", r.lower_level},
          {"j", r.depth},
          {"occurrences", to_json(r.occurrences)},
          {"claimed_gap_range", {"0", to_decimal(r.k_bound)}},
          {"missing_gaps", missing},
          {"deviation_from_claim", !r.missing_gaps.empty()},
          {"prefix_ok", r.prefix_ok},
          {"suffix_edges", to_decimal(r.occurrences.suffix.edges)},
          {"suffix_bound", to_decimal(r.suffix_bound)},
          {"suffix_ok", r.suffix_ok},
          {"return_lengths_head", returns}};
}

// ---------------------------------------------------------------------------
// Numerical semigroups

/// Largest integer not representable as a nonnegative combination of the
/// generators; -1 when every nonnegative integer is representable and
/// nullopt when the semigroup is not cofinite (gcd > 1).
inline std::optional<std::int64_t> frobenius_number(std::span<const std::uint64_t> generators)
{
  std::uint64_t g = 0;
  for (auto x : generators)
    g = std::gcd(g, x);
  if (g != 1)
    return std::nullopt;
  const std::uint64_t smallest = *std::min_element(generators.begin(), generators.end());
  std::vector<bool> representable{true};
  std::int64_t last_gap = -1;
  std::uint64_t run = 1;
  for (std::uint64_t n = 1; run < smallest; ++n) {
    bool ok = false;
    for (auto x : generators)
      ok = ok || (x <= n && representable[n - x]);
    representable.push_back(ok);
    if (ok) {
      ++run;
    } else {
      run = 0;
      last_gap = static_cast<std::int64_t>(n);
    }
  }
  return last_gap;
}

// ---------------------------------------------------------------------------
// Degree stability along orbits

struct StabilityReport
{
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::size_t invariance_checked = 0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

/// For each handle whose column is on its spine cycle i at every level
/// N..M (N < M), checks that one step later levels N+1..M are still on
/// cycle i, and, when N <= M-2, that the depth-(M-1) degree is unchanged.
inline StabilityReport degree_stability_check(const CoverTower& tower, const std::vector<PointHandle>& corpus)
{
  StabilityReport rep;
  for (const auto& h : corpus) {
    if (h.is_fixed()) {
      ++rep.checked;
      if (column_of(tower, step(tower, h, 1), h.spine_level) != column_of(tower, h, h.spine_level))
        rep.failures.push_back("fixed point moved");
      continue;
    }
    const std::size_t top = h.spine_level;
    const auto before = column_of(tower, h, top);
    const std::size_t cycle = before[top].cycle;
    if (cycle == 0) {
      ++rep.skipped;
      continue;
    }
    std::size_t n = top;
    while (n > 0 && before[n - 1].cycle == cycle)
      --n;
    const auto [lo, hi] = valid_time_range(tower, h);
    if (n >= top || h.time + 1 > hi) {
      ++rep.skipped;
      continue;
    }
    ++rep.checked;
    const auto after = column_of(tower, step(tower, h, 1), top);
    for (std::size_t level = n + 1; level <= top; ++level) {
      if (after[level].cycle != cycle) {
        rep.failures.push_back("handle " + to_string(h.seed) + " left cycle " + std::to_string(cycle) +
                               " at level " + std::to_string(level));
        break;
      }
    }
    if (n + 2 <= top) {
      ++rep.invariance_checked;
      const std::vector<VertexAddr> b(before.begin(), before.end() - 1);
      const std::vector<VertexAddr> a(after.begin(), after.end() - 1);
      if (min_degree(a) != min_degree(b))
        rep.failures.push_back("depth-" + std::to_string(top - 1) + " degree changed for " + to_string(h.seed));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Structure

/// True iff every closed path through a non-base vertex visits vertex 0,
/// i.e. the graph with the base removed is acyclic.
inline bool every_cycle_visits_base(const graph::MaterializedGraph& g)
{
  const std::size_t n = g.vertex_count();
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& e : g.edges()) {
    if (e.from != 0 && e.to != 0)
      ++indegree[e.to];
  }
  std::vector<graph::VertexId> ready;
  for (graph::VertexId v = 1; v < n; ++v) {
    if (indegree[v] == 0)
      ready.push_back(v);
  }
  std::size_t removed = 0;
  while (!ready.empty()) {
    const auto v = ready.back();
    ready.pop_back();
    ++removed;
    for (const auto& e : g.out_edges(v)) {
      if (e.to != 0 && --indegree[e.to] == 0)
        ready.push_back(e.to);
    }
  }
  return n == 0 || removed == n - 1;
}

/// Seeded corpus of handles.
inline std::vector<PointHandle> sample_handles(const CoverTower& tower, std::size_t spine_level, const BigInt& reserve,
                                               std::uint64_t seed, std::size_t count)
{
  HandleSampler sampler(tower, spine_level, reserve, seed);
  std::vector<PointHandle> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(sampler.next());
  return out;
}

} // namespace chaoscope
