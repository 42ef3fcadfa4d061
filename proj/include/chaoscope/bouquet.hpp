#pragma once

// Symbolic bouquet graphs: every level G_n is a base vertex with a self-loop
// plus simple cycles c_{n,1..N} meeting only at the base. A cover G_{n+1} -> G_n
// is described by one image formula per cycle of G_{n+1}; vertex j of a
// cycle maps to vertex j of its image path. Nothing in this header expands a
// formula into edges unless a budget allows it.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaoscope/bigint.hpp"
#include "chaoscope/graph_core.hpp"

namespace chaoscope {

/// `count` consecutive traversals of one atom: the base edge (cycle == 0) or
/// the cycle c_{cycle} of the level below.
struct Run
{
  std::size_t cycle = 0;
  BigInt count = 1;

  bool is_edge() const { return cycle == 0; }
  friend bool operator==(const Run&, const Run&) = default;
};

inline Run edge_run(BigInt count) { return Run{0, std::move(count)}; }
inline Run cycle_run(std::size_t cycle, BigInt count) { return Run{cycle, std::move(count)}; }

/// One summand of a Series body: `coefficient` copies of the atom, or
/// `index` copies when `indexed` is set.
struct SeriesPart
{
  std::size_t cycle = 0;
  BigInt coefficient = 1;
  bool indexed = false;

  BigInt count_at(const BigInt& index) const { return indexed ? index : coefficient; }
  friend bool operator==(const SeriesPart&, const SeriesPart&) = default;
};

/// sum_{j=first..last} body(j), expanded lazily. Block j has length A + B*j.
struct Series
{
  BigInt first = 1;
  BigInt last = 1;
  std::vector<SeriesPart> body;

  BigInt block_count() const { return last < first ? BigInt(0) : BigInt(last - first + 1); }
  friend bool operator==(const Series&, const Series&) = default;
};

using Term = std::variant<Run, Series>;

/// Lower-level vertex: the base (cycle == 0, position == 0) or position
/// 1..|c|-1 of a cycle.
struct Locus
{
  std::size_t cycle = 0;
  BigInt position = 0;

  bool is_base() const { return cycle == 0; }
  friend bool operator==(const Locus&, const Locus&) = default;
};

class FormulaError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A cycle on a bouquet graph written as a sum of runs and series, with
/// cumulative lengths cached against the atom lengths of the ambient level.
class PathExpr
{
public:
  PathExpr() = default;

  /// atom_lengths[0] must be 1 (the base edge); atom_lengths[i] = |c_i|.
  PathExpr(std::vector<Term> terms, std::span<const BigInt> atom_lengths)
    : terms_(std::move(terms)), atom_lengths_(atom_lengths.begin(), atom_lengths.end())
  {
    prefix_.reserve(terms_.size() + 1);
    prefix_.push_back(0);
    for (const auto& term : terms_) {
      if (const auto* run = std::get_if<Run>(&term)) {
        check_atom(run->cycle);
        if (run->count < 1)
          throw FormulaError("run count must be at least 1");
        prefix_.push_back(prefix_.back() + run->count * atom_lengths_[run->cycle]);
      } else {
        const auto& s = std::get<Series>(term);
        if (s.body.empty())
          throw FormulaError("series body is empty");
        if (s.last < s.first)
          throw FormulaError("series bound is empty");
        for (const auto& part : s.body) {
          check_atom(part.cycle);
          if (part.count_at(s.first) < 1)
            throw FormulaError("series part has a count below 1");
        }
        prefix_.push_back(prefix_.back() + series_prefix(s, s.block_count()));
      }
    }
  }

  const std::vector<Term>& terms() const { return terms_; }
  const BigInt& length() const { return prefix_.back(); }
  std::span<const BigInt> prefix_sums() const { return prefix_; }
  std::span<const BigInt> atom_lengths() const { return atom_lengths_; }

  bool starts_with_edge() const { return !terms_.empty() && first_atom(terms_.front()) == 0; }
  bool ends_with_edge() const { return !terms_.empty() && last_atom(terms_.back()) == 0; }

  /// Vertex at `offset` (0 <= offset < length) in terms of the lower level.
  Locus locate(const BigInt& offset) const
  {
    Locus out;
    for_each_run(offset, [&](const Run& run, const BigInt& start) {
      if (!run.is_edge()) {
        const BigInt r = (offset - start) % atom_lengths_[run.cycle];
        if (r != 0)
          out = Locus{run.cycle, r};
      }
      return false;
    });
    return out;
  }

  /// Visits the flattened run sequence starting with the run that contains
  /// `from`. The callback receives the run and its start offset and returns
  /// false to stop.
  template <class F>
  void for_each_run(const BigInt& from, F&& f) const
  {
    if (from < 0 || from >= length())
      throw std::out_of_range("offset " + to_decimal(from) + " outside path of length " + to_decimal(length()));
    const auto it = std::upper_bound(prefix_.begin(), prefix_.end(), from);
    for (std::size_t t = static_cast<std::size_t>(it - prefix_.begin()) - 1; t < terms_.size(); ++t) {
      const BigInt& term_start = prefix_[t];
      if (const auto* run = std::get_if<Run>(&terms_[t])) {
        if (!f(*run, term_start))
          return;
        continue;
      }
      const auto& s = std::get<Series>(terms_[t]);
      BigInt block = from > term_start ? series_block_at(s, from - term_start) : BigInt(0);
      BigInt start = term_start + series_prefix(s, block);
      const BigInt blocks = s.block_count();
      for (; block < blocks; ++block) {
        const BigInt index = s.first + block;
        for (const auto& part : s.body) {
          Run run{part.cycle, part.count_at(index)};
          const BigInt len = run.count * atom_lengths_[part.cycle];
          if (start + len > from && !f(run, start))
            return;
          start += len;
        }
      }
    }
  }

  /// Start offset of the first run of `cycle` that begins at or after `from`.
  /// Series terms whose body never mentions the cycle are skipped whole.
  std::optional<BigInt> next_run_of(std::size_t cycle, const BigInt& from) const
  {
    const auto begin = std::upper_bound(prefix_.begin(), prefix_.end(), std::max(from, BigInt(0)));
    for (std::size_t t = begin == prefix_.begin() ? 0 : static_cast<std::size_t>(begin - prefix_.begin()) - 1;
         t < terms_.size(); ++t) {
      if (const auto* run = std::get_if<Run>(&terms_[t])) {
        if (run->cycle == cycle && prefix_[t] >= from)
          return prefix_[t];
        continue;
      }
      const auto& s = std::get<Series>(terms_[t]);
      const bool mentions =
          std::any_of(s.body.begin(), s.body.end(), [&](const SeriesPart& p) { return p.cycle == cycle; });
      if (!mentions)
        continue;
      std::optional<BigInt> found;
      for_each_run(std::max(from, prefix_[t]), [&](const Run& run, const BigInt& start) {
        if (start >= prefix_[t + 1])
          return false;
        if (run.cycle == cycle && start >= from) {
          found = start;
          return false;
        }
        return true;
      });
      if (found)
        return found;
    }
    return std::nullopt;
  }

  /// Number of traversals of `cycle` (0 = base edge) across the whole path.
  BigInt atom_count(std::size_t cycle) const
  {
    BigInt total = 0;
    for (const auto& term : terms_) {
      if (const auto* run = std::get_if<Run>(&term)) {
        if (run->cycle == cycle)
          total += run->count;
        continue;
      }
      const auto& s = std::get<Series>(term);
      const BigInt n = s.block_count();
      for (const auto& part : s.body) {
        if (part.cycle != cycle)
          continue;
        total += part.indexed ? BigInt((s.first + s.last) * n / 2) : BigInt(part.coefficient * n);
      }
    }
    return total;
  }

  /// Total number of runs after series expansion.
  BigInt run_count() const
  {
    BigInt total = 0;
    for (const auto& term : terms_) {
      if (std::holds_alternative<Run>(term))
        total += 1;
      else
        total += std::get<Series>(term).block_count() * std::get<Series>(term).body.size();
    }
    return total;
  }

  /// Fully expanded run list. Throws FormulaError above `max_runs`.
  std::vector<Run> expand(std::size_t max_runs = 1'000'000) const
  {
    if (run_count() > max_runs)
      throw FormulaError("formula has " + to_decimal(run_count()) + " runs, above the expansion cap");
    std::vector<Run> out;
    if (length() == 0)
      return out;
    for_each_run(0, [&](const Run& run, const BigInt&) {
      out.push_back(run);
      return true;
    });
    return out;
  }

  friend bool operator==(const PathExpr& a, const PathExpr& b) { return a.terms_ == b.terms_; }

private:
  static std::size_t first_atom(const Term& t)
  {
    if (const auto* run = std::get_if<Run>(&t))
      return run->cycle;
    return std::get<Series>(t).body.front().cycle;
  }
  static std::size_t last_atom(const Term& t)
  {
    if (const auto* run = std::get_if<Run>(&t))
      return run->cycle;
    return std::get<Series>(t).body.back().cycle;
  }

  void check_atom(std::size_t cycle) const
  {
    if (cycle >= atom_lengths_.size())
      throw FormulaError("formula references c" + std::to_string(cycle) + " but the level has " +
                         std::to_string(atom_lengths_.size() - 1) + " cycles");
  }

  // Block length is A + B*j.
  std::pair<BigInt, BigInt> series_coefficients(const Series& s) const
  {
    BigInt a = 0, b = 0;
    for (const auto& part : s.body) {
      if (part.indexed)
        b += atom_lengths_[part.cycle];
      else
        a += part.coefficient * atom_lengths_[part.cycle];
    }
    return {a, b};
  }

  // Length of the first `blocks` blocks.
  BigInt series_prefix(const Series& s, const BigInt& blocks) const
  {
    const auto [a, b] = series_coefficients(s);
    return blocks * a + b * (blocks * s.first + blocks * (blocks - 1) / 2);
  }

  // Largest t in [0, block_count) with series_prefix(t) <= local, found by
  // inverting the quadratic b*t^2 + beta*t <= 2*local.
  BigInt series_block_at(const Series& s, const BigInt& local) const
  {
    const auto [a, b] = series_coefficients(s);
    BigInt t;
    if (b == 0) {
      t = local / a;
    } else {
      const BigInt beta = 2 * a + 2 * b * s.first - b;
      const BigInt root = isqrt(beta * beta + 8 * b * local);
      t = root > beta ? BigInt((root - beta) / (2 * b)) : BigInt(0);
    }
    const BigInt max_t = s.block_count() - 1;
    if (t > max_t)
      t = max_t;
    while (t > 0 && series_prefix(s, t) > local)
      --t;
    while (t < max_t && series_prefix(s, t + 1) <= local)
      ++t;
    return t;
  }

  std::vector<Term> terms_;
  std::vector<BigInt> atom_lengths_;
  std::vector<BigInt> prefix_;
};

/// Level n of a tower: the cycle lengths of G_n and the image formulas (over
/// G_n's symbols) of every cycle of G_{n+1}. The top level of a finite tower
/// has no formulas.
struct LevelSpec
{
  std::size_t level = 0;
  std::vector<BigInt> cycle_lengths;
  BigInt k_value;
  std::vector<PathExpr> image_formulas;

  std::size_t cycle_count() const { return cycle_lengths.size(); }

  const BigInt& cycle_length(std::size_t i) const
  {
    if (i < 1 || i > cycle_lengths.size())
      throw std::out_of_range("cycle index " + std::to_string(i) + " out of range at level " + std::to_string(level));
    return cycle_lengths[i - 1];
  }

  /// [1, |c_1|, ..., |c_N|]: lengths indexed by atom.
  std::vector<BigInt> atom_lengths() const
  {
    std::vector<BigInt> out{1};
    out.insert(out.end(), cycle_lengths.begin(), cycle_lengths.end());
    return out;
  }

  BigInt vertex_count() const
  {
    BigInt n = 1;
    for (const auto& l : cycle_lengths)
      n += l - 1;
    return n;
  }
};

/// 2 * (|e| + sum_i |c_i|).
inline BigInt k_value_for(std::span<const BigInt> cycle_lengths)
{
  BigInt sum = 1;
  for (const auto& l : cycle_lengths)
    sum += l;
  return 2 * sum;
}

/// The terms of the built-in image formulas of G_{n+1}'s cycles over G_n.
inline std::vector<std::vector<Term>> builtin_formula_terms(std::size_t n, std::span<const BigInt> cycle_lengths)
{
  if (n == 0)
    return {{edge_run(10)}};
  const BigInt k = k_value_for(cycle_lengths);
  std::vector<std::vector<Term>> out;

  std::vector<Term> first;
  first.push_back(Series{1, k, {SeriesPart{0, 1, true}, SeriesPart{1, 2, false}}});
  first.push_back(edge_run(1));
  for (std::size_t i = 2; i <= n; ++i)
    first.push_back(cycle_run(i, 2));
  first.push_back(edge_run(1));
  out.push_back(std::move(first));

  for (std::size_t i = 2; i <= n; ++i) {
    std::vector<Term> terms{edge_run(1)};
    for (std::size_t l = i; l <= n; ++l)
      terms.push_back(cycle_run(l, 2));
    terms.push_back(edge_run(1));
    out.push_back(std::move(terms));
  }

  BigInt sum = 0;
  for (const auto& l : cycle_lengths)
    sum += l;
  const BigInt width = n + 2;
  out.push_back({edge_run(width * width * sum)});
  return out;
}

inline LevelSpec make_level_spec(std::size_t n, std::vector<BigInt> cycle_lengths,
                                 const std::vector<std::vector<Term>>& formulas)
{
  LevelSpec spec;
  spec.level = n;
  spec.cycle_lengths = std::move(cycle_lengths);
  spec.k_value = k_value_for(spec.cycle_lengths);
  const auto atoms = spec.atom_lengths();
  for (const auto& terms : formulas)
    spec.image_formulas.emplace_back(terms, atoms);
  return spec;
}

/// A sequence of bouquet levels G_0 <- G_1 <- ... ; spec(n) describes G_n and
/// the cover G_{n+1} -> G_n.
class CoverTower
{
public:
  virtual ~CoverTower() = default;

  /// Throws std::out_of_range above top_level().
  virtual std::shared_ptr<const LevelSpec> spec(std::size_t n) const = 0;

  /// Deepest level with a graph; nullopt for an unbounded tower.
  virtual std::optional<std::size_t> top_level() const = 0;

  std::size_t cycle_count(std::size_t n) const { return spec(n)->cycle_count(); }
  BigInt cycle_length(std::size_t n, std::size_t i) const { return spec(n)->cycle_length(i); }

  bool has_level(std::size_t n) const
  {
    const auto top = top_level();
    return !top || n <= *top;
  }

  /// Formula of cycle i of level n+1, written over level n.
  const PathExpr& image_formula(std::size_t n, std::size_t i) const
  {
    const auto s = spec(n);
    if (i < 1 || i > s->image_formulas.size())
      throw std::out_of_range("no image formula for c_{" + std::to_string(n + 1) + "," + std::to_string(i) + "}");
    return s->image_formulas[i - 1];
  }
};

/// The built-in construction, memoized per level. Concurrent callers may
/// build the same level; the first insertion wins and results are equal.
class BuiltinTower final : public CoverTower
{
public:
  std::shared_ptr<const LevelSpec> spec(std::size_t n) const override
  {
    {
      std::lock_guard lock(mutex_);
      if (n < cache_.size())
        return cache_[n];
    }
    std::shared_ptr<const LevelSpec> below = n == 0 ? nullptr : spec(n - 1);
    std::vector<BigInt> lengths;
    if (below) {
      for (const auto& f : below->image_formulas)
        lengths.push_back(f.length());
    }
    auto built = std::make_shared<const LevelSpec>(make_level_spec(n, lengths, builtin_formula_terms(n, lengths)));
    std::lock_guard lock(mutex_);
    if (n == cache_.size())
      cache_.push_back(std::move(built));
    return cache_[n];
  }

  std::optional<std::size_t> top_level() const override { return std::nullopt; }

private:
  mutable std::mutex mutex_;
  mutable std::vector<std::shared_ptr<const LevelSpec>> cache_;
};

/// A finite tower from explicit specs (e.g. a parsed cover document).
class ExplicitTower final : public CoverTower
{
public:
  explicit ExplicitTower(std::vector<std::shared_ptr<const LevelSpec>> specs) : specs_(std::move(specs))
  {
    if (specs_.empty())
      throw std::invalid_argument("a tower needs at least level 0");
    for (std::size_t n = 0; n < specs_.size(); ++n) {
      if (specs_[n]->level != n)
        throw std::invalid_argument("tower levels must be contiguous from 0");
      if (n + 1 < specs_.size() && specs_[n]->image_formulas.size() != specs_[n + 1]->cycle_count())
        throw std::invalid_argument("level " + std::to_string(n) + " formula count does not match level " +
                                    std::to_string(n + 1) + " cycle count");
    }
  }

  std::shared_ptr<const LevelSpec> spec(std::size_t n) const override
  {
    if (n >= specs_.size())
      throw std::out_of_range("tower has no level " + std::to_string(n));
    return specs_[n];
  }

  std::optional<std::size_t> top_level() const override { return specs_.size() - 1; }

private:
  std::vector<std::shared_ptr<const LevelSpec>> specs_;
};

inline const BuiltinTower& builtin_tower()
{
  static const BuiltinTower tower;
  return tower;
}

inline std::shared_ptr<const LevelSpec> build_level_spec(std::size_t n) { return builtin_tower().spec(n); }

/// |c_{n,i}| of the built-in construction. Throws std::out_of_range unless 1 <= i <= n.
inline BigInt cycle_length(std::size_t n, std::size_t i) { return builtin_tower().cycle_length(n, i); }

// ---------------------------------------------------------------------------
// Addresses

struct VertexAddr
{
  std::size_t level = 0;
  std::size_t cycle = 0; // 0 = base
  BigInt position = 0;   // edges from the base along the cycle

  static VertexAddr base(std::size_t level) { return VertexAddr{level, 0, 0}; }
  static VertexAddr on_cycle(std::size_t level, std::size_t cycle, BigInt position)
  {
    return VertexAddr{level, cycle, std::move(position)};
  }

  bool is_base() const { return cycle == 0; }
  Locus locus() const { return Locus{cycle, position}; }

  friend bool operator==(const VertexAddr&, const VertexAddr&) = default;
  friend bool operator<(const VertexAddr& a, const VertexAddr& b)
  {
    if (a.level != b.level)
      return a.level < b.level;
    if (a.cycle != b.cycle)
      return a.cycle < b.cycle;
    return a.position < b.position;
  }
};

inline std::string to_string(const VertexAddr& a)
{
  if (a.is_base())
    return "(" + std::to_string(a.level) + ",base)";
  return "(" + std::to_string(a.level) + "," + std::to_string(a.cycle) + "," + to_decimal(a.position) + ")";
}

class AddressError : public std::out_of_range
{
public:
  using std::out_of_range::out_of_range;
};

inline void check_address(const CoverTower& tower, const VertexAddr& a)
{
  if (!tower.has_level(a.level))
    throw AddressError("tower has no level " + std::to_string(a.level));
  if (a.is_base()) {
    if (a.position != 0)
      throw AddressError("base address with nonzero position");
    return;
  }
  const auto s = tower.spec(a.level);
  if (a.cycle > s->cycle_count())
    throw AddressError("cycle " + std::to_string(a.cycle) + " does not exist at level " + std::to_string(a.level));
  if (a.position < 1 || a.position >= s->cycle_length(a.cycle))
    throw AddressError("position " + to_decimal(a.position) + " outside 1.." +
                       to_decimal(s->cycle_length(a.cycle) - 1) + " on " + to_string(a));
}

/// Image of a level-(n+1) address in level n.
inline VertexAddr project_addr(const CoverTower& tower, const VertexAddr& a)
{
  if (a.level == 0)
    throw AddressError("level 0 has nothing below it");
  check_address(tower, a);
  if (a.is_base())
    return VertexAddr::base(a.level - 1);
  const Locus l = tower.image_formula(a.level - 1, a.cycle).locate(a.position);
  return VertexAddr{a.level - 1, l.cycle, l.position};
}

inline VertexAddr project_addr(const VertexAddr& a) { return project_addr(builtin_tower(), a); }

inline VertexAddr project_to(const CoverTower& tower, VertexAddr a, std::size_t level)
{
  if (level > a.level)
    throw AddressError("cannot project upward");
  check_address(tower, a);
  while (a.level > level) {
    if (a.is_base())
      return VertexAddr::base(level);
    a = project_addr(tower, a);
  }
  return a;
}

struct LiftResult
{
  std::vector<VertexAddr> addresses; // ascending (cycle, position); base first
  BigInt total = 0;
};

/// Preimages of `a` one level up, truncated to `max_results`.
inline LiftResult lift_choices(const CoverTower& tower, const VertexAddr& a, std::size_t max_results)
{
  check_address(tower, a);
  if (!tower.has_level(a.level + 1))
    throw AddressError("tower has no level " + std::to_string(a.level + 1));
  const auto s = tower.spec(a.level);
  const BigInt target_len = a.is_base() ? BigInt(1) : s->cycle_length(a.cycle);
  LiftResult out;
  auto keep = [&](VertexAddr b) {
    if (out.addresses.size() < max_results)
      out.addresses.push_back(std::move(b));
  };
  if (a.is_base()) {
    out.total += 1;
    keep(VertexAddr::base(a.level + 1));
  }
  const auto atoms = s->atom_lengths();
  for (std::size_t i = 1; i <= s->image_formulas.size(); ++i) {
    const PathExpr& f = s->image_formulas[i - 1];
    BigInt count = f.atom_count(a.cycle);
    if (a.is_base()) {
      // every run contributes its count of base vertices; offset 0 is the base itself
      count = 0;
      for (std::size_t c = 0; c < atoms.size(); ++c)
        count += f.atom_count(c);
      count -= 1;
    }
    out.total += count;
    if (out.addresses.size() >= max_results || count == 0)
      continue;
    f.for_each_run(0, [&](const Run& run, const BigInt& start) {
      if (a.is_base()) {
        const BigInt step = atoms[run.cycle];
        for (BigInt q = 0; q < run.count && out.addresses.size() < max_results; ++q) {
          const BigInt offset = start + q * step;
          if (offset != 0)
            keep(VertexAddr::on_cycle(a.level + 1, i, offset));
        }
      } else if (run.cycle == a.cycle) {
        for (BigInt q = 0; q < run.count && out.addresses.size() < max_results; ++q)
          keep(VertexAddr::on_cycle(a.level + 1, i, start + q * target_len + a.position));
      }
      return out.addresses.size() < max_results;
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Budgets and occurrence scanning

class BudgetExceeded : public std::runtime_error
{
public:
  BudgetExceeded(const std::string& what, BigInt required, BigInt budget)
    : std::runtime_error(what + ": requires " + to_decimal(required) + ", budget is " + to_decimal(budget)),
      required_(std::move(required)), budget_(std::move(budget))
  {
  }
  const BigInt& required() const { return required_; }
  const BigInt& budget() const { return budget_; }

private:
  BigInt required_;
  BigInt budget_;
};

inline constexpr std::uint64_t default_scan_budget = 100'000'000;
inline constexpr std::uint64_t default_vertex_budget = 10'000'000;

/// Gap before the first (or after the last) complete copy of the target.
struct BoundaryDescriptor
{
  BigInt edges = 0;
  bool only_base_edges = true;
};

struct OccurrenceReport
{
  std::size_t lower_level = 0;
  std::size_t upper_level = 0;
  std::size_t target_cycle = 0;
  std::size_t source_cycle = 0;
  BigInt scanned_length = 0;
  BigInt copy_count = 0;
  std::vector<BigInt> offsets; // first copies, truncated
  std::map<BigInt, BigInt> gap_histogram;
  BoundaryDescriptor prefix;
  BoundaryDescriptor suffix;
};

/// Runs of the expansion of c_{upper,source} written over level `lower`.
template <class F>
void expand_to_level(const CoverTower& tower, std::size_t lower, std::size_t upper, std::size_t source, F&& emit)
{
  if (upper == lower + 1) {
    const PathExpr& f = tower.image_formula(lower, source);
    f.for_each_run(0, [&](const Run& run, const BigInt&) {
      emit(run);
      return true;
    });
    return;
  }
  const PathExpr& f = tower.image_formula(upper - 1, source);
  f.for_each_run(0, [&](const Run& run, const BigInt&) {
    if (run.is_edge()) {
      emit(run);
    } else {
      for (BigInt q = 0; q < run.count; ++q)
        expand_to_level(tower, lower, upper - 1, run.cycle, emit);
    }
    return true;
  });
}

/// Complete copies of c_{lower,target} inside phi_{upper,lower}(c_{upper,source}).
/// Throws BudgetExceeded if the image is longer than `budget` edges.
inline OccurrenceReport find_occurrences(const CoverTower& tower, std::size_t lower, std::size_t upper,
                                         std::size_t target, std::size_t source,
                                         const BigInt& budget = default_scan_budget, std::size_t max_offsets = 1000)
{
  if (upper <= lower)
    throw std::invalid_argument("occurrence scan needs lower < upper");
  OccurrenceReport rep{lower, upper, target, source};
  rep.scanned_length = tower.cycle_length(upper, source);
  const auto lower_spec = tower.spec(lower);
  const BigInt target_len = lower_spec->cycle_length(target);
  if (rep.scanned_length > budget)
    throw BudgetExceeded("occurrence scan of c_{" + std::to_string(upper) + "," + std::to_string(source) + "}",
                         rep.scanned_length, budget);

  const auto atoms = lower_spec->atom_lengths();
  BigInt offset = 0;
  BoundaryDescriptor gap;
  bool seen = false;
  expand_to_level(tower, lower, upper, source, [&](const Run& run) {
    const BigInt len = run.count * atoms[run.cycle];
    if (run.cycle != target) {
      gap.edges += len;
      gap.only_base_edges = gap.only_base_edges && run.is_edge();
      offset += len;
      return;
    }
    if (!seen) {
      rep.prefix = gap;
      seen = true;
    } else {
      rep.gap_histogram[gap.edges] += 1;
    }
    if (run.count > 1)
      rep.gap_histogram[0] += run.count - 1;
    for (BigInt q = 0; q < run.count && rep.offsets.size() < max_offsets; ++q)
      rep.offsets.push_back(offset + q * target_len);
    rep.copy_count += run.count;
    offset += len;
    gap = BoundaryDescriptor{};
  });
  if (seen)
    rep.suffix = gap;
  else
    rep.prefix = rep.suffix = gap;
  return rep;
}

// ---------------------------------------------------------------------------
// Materialization

/// Dense vertex ids for a bouquet level: 0 is the base, then cycle 1
/// positions 1..|c_1|-1, then cycle 2, and so on.
class VertexLayout
{
public:
  explicit VertexLayout(std::size_t level, std::span<const BigInt> cycle_lengths) : level_(level)
  {
    std::uint64_t next = 1;
    for (const auto& l : cycle_lengths) {
      first_id_.push_back(next);
      lengths_.push_back(static_cast<std::uint64_t>(l));
      next += static_cast<std::uint64_t>(l) - 1;
    }
    vertex_count_ = next;
  }

  std::uint64_t vertex_count() const { return vertex_count_; }

  graph::VertexId id_of(std::size_t cycle, std::uint64_t position) const
  {
    if (cycle == 0 || position == 0 || position == lengths_.at(cycle - 1))
      return 0;
    return static_cast<graph::VertexId>(first_id_.at(cycle - 1) + position - 1);
  }

  graph::VertexId id_of(const VertexAddr& a) const
  {
    return a.is_base() ? 0 : id_of(a.cycle, static_cast<std::uint64_t>(a.position));
  }

  VertexAddr addr_of(graph::VertexId id) const
  {
    if (id == 0)
      return VertexAddr::base(level_);
    const auto it = std::upper_bound(first_id_.begin(), first_id_.end(), std::uint64_t{id});
    const std::size_t cycle = static_cast<std::size_t>(it - first_id_.begin());
    return VertexAddr::on_cycle(level_, cycle, BigInt(id - first_id_[cycle - 1] + 1));
  }

private:
  std::size_t level_;
  std::vector<std::uint64_t> first_id_;
  std::vector<std::uint64_t> lengths_;
  std::uint64_t vertex_count_ = 1;
};

inline void check_vertex_budget(const LevelSpec& s, const BigInt& budget)
{
  if (s.vertex_count() > budget)
    throw BudgetExceeded("materializing level " + std::to_string(s.level), s.vertex_count(), budget);
}

inline graph::GraphPtr materialize_graph(const CoverTower& tower, std::size_t n,
                                         const BigInt& budget = default_vertex_budget)
{
  const auto s = tower.spec(n);
  check_vertex_budget(*s, budget);
  const VertexLayout layout(n, s->cycle_lengths);
  std::vector<graph::Edge> edges{{0, 0}};
  edges.reserve(static_cast<std::size_t>(layout.vertex_count()) + s->cycle_count());
  for (std::size_t i = 1; i <= s->cycle_count(); ++i) {
    const auto len = static_cast<std::uint64_t>(s->cycle_length(i));
    for (std::uint64_t p = 0; p < len; ++p)
      edges.push_back({layout.id_of(i, p), layout.id_of(i, p + 1)});
  }
  return std::make_shared<const graph::MaterializedGraph>(static_cast<std::size_t>(layout.vertex_count()),
                                                          std::move(edges));
}

struct MaterializedLevel
{
  std::size_t level = 0;
  graph::GraphPtr graph;
  std::optional<graph::CoverMap> cover_down; // G_n -> G_{n-1}, absent at level 0
  std::vector<BigInt> cycle_lengths;
  VertexLayout layout{0, {}};
};

/// Explicit G_n and the vertex map G_n -> G_{n-1}, built by walking every
/// image formula run by run. This is deliberately independent of
/// PathExpr::locate so that it can serve as an oracle for project_addr.
inline MaterializedLevel materialize_level(const CoverTower& tower, std::size_t n,
                                           const BigInt& budget = default_vertex_budget,
                                           graph::GraphPtr lower_graph = nullptr)
{
  const auto s = tower.spec(n);
  MaterializedLevel out{n, materialize_graph(tower, n, budget), std::nullopt, s->cycle_lengths,
                        VertexLayout(n, s->cycle_lengths)};
  if (n == 0)
    return out;

  const auto below = tower.spec(n - 1);
  if (!lower_graph)
    lower_graph = materialize_graph(tower, n - 1, budget);
  const VertexLayout lower(n - 1, below->cycle_lengths);
  const auto atoms = below->atom_lengths();
  std::vector<graph::VertexId> map(out.graph->vertex_count(), 0);
  for (std::size_t i = 1; i <= s->cycle_count(); ++i) {
    std::uint64_t offset = 0;
    below->image_formulas[i - 1].for_each_run(0, [&](const Run& run, const BigInt&) {
      const auto count = static_cast<std::uint64_t>(run.count);
      const auto len = static_cast<std::uint64_t>(atoms[run.cycle]);
      for (std::uint64_t q = 0; q < count; ++q) {
        for (std::uint64_t r = 0; r < len; ++r, ++offset) {
          if (offset > 0)
            map[out.layout.id_of(i, offset)] = run.is_edge() ? 0 : lower.id_of(run.cycle, r);
        }
      }
      return true;
    });
  }
  out.cover_down.emplace(out.graph, std::move(lower_graph), std::move(map));
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const Term& term)
{
  auto atom = [](std::size_t c) { return c == 0 ? std::string("e") : "c" + std::to_string(c); };
  if (const auto* run = std::get_if<Run>(&term))
    return {{"kind", run->is_edge() ? "edge_run" : "cycle_run"}, {"atom", atom(run->cycle)},
            {"count", to_decimal(run->count)}};
  const auto& s = std::get<Series>(term);
  nlohmann::json body = nlohmann::json::array();
  for (const auto& p : s.body) {
    body.push_back({{"atom", atom(p.cycle)},
                    {"count", p.indexed ? nlohmann::json("j") : nlohmann::json(to_decimal(p.coefficient))}});
  }
  return {{"kind", "series"}, {"first", to_decimal(s.first)}, {"last", to_decimal(s.last)}, {"body", body}};
}

inline nlohmann::json to_json(const PathExpr& f)
{
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : f.terms())
    terms.push_back(to_json(t));
  return {{"length", to_decimal(f.length())}, {"terms", terms}};
}

inline nlohmann::json to_json(const LevelSpec& s)
{
  nlohmann::json lengths = nlohmann::json::array();
  for (const auto& l : s.cycle_lengths)
    lengths.push_back(to_decimal(l));
  nlohmann::json formulas = nlohmann::json::array();
  for (const auto& f : s.image_formulas)
    formulas.push_back(to_json(f));
  return {{"level", s.level}, {"cycle_lengths", lengths}, {"k", to_decimal(s.k_value)}, {"image_formulas", formulas}};
}

inline nlohmann::json to_json(const OccurrenceReport& r, std::size_t max_offsets = 50)
{
  nlohmann::json offsets = nlohmann::json::array();
  for (std::size_t i = 0; i < r.offsets.size() && i < max_offsets; ++i)
    offsets.push_back(to_decimal(r.offsets[i]));
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [gap, count] : r.gap_histogram)
    hist[to_decimal(gap)] = to_decimal(count);
  auto boundary = [](const BoundaryDescriptor& b) {
    return nlohmann::json{{"edges", to_decimal(b.edges)}, {"only_base_edges", b.only_base_edges}};
  };
  return {{"lower_level", r.lower_level},       {"upper_level", r.upper_level},
          {"target_cycle", r.target_cycle},     {"source_cycle", r.source_cycle},
          {"scanned_length", to_decimal(r.scanned_length)}, {"copy_count", to_decimal(r.copy_count)},
          {"offsets_truncated", offsets},       {"gap_histogram", hist},
          {"prefix", boundary(r.prefix)},       {"suffix", boundary(r.suffix)}};
}

} // namespace chaoscope
