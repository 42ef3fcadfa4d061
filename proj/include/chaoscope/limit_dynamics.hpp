#pragma once

// Points of the inverse limit represented by a single deep address (the
// spine) plus a time offset. Every shallower coordinate is a projection of
// the spine coordinate, so columns are coherent by construction.

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/random/uniform_int_distribution.hpp>
#include <nlohmann/json.hpp>

#include "chaoscope/bigint.hpp"
#include "chaoscope/bouquet.hpp"

namespace chaoscope {

/// Raised when a requested time leaves the range on which the spine
/// coordinate is determined. `time` is the first offending time.
class SpineExhausted : public std::runtime_error
{
public:
  SpineExhausted(BigInt time, BigInt first_valid, BigInt last_valid)
    : std::runtime_error("spine exhausted at time " + to_decimal(time) + " (valid times " + to_decimal(first_valid) +
                         ".." + to_decimal(last_valid) + "); lift the spine address to continue"),
      time_(std::move(time)), first_valid_(std::move(first_valid)), last_valid_(std::move(last_valid))
  {
  }
  const BigInt& time() const { return time_; }
  const BigInt& first_valid() const { return first_valid_; }
  const BigInt& last_valid() const { return last_valid_; }

private:
  BigInt time_;
  BigInt first_valid_;
  BigInt last_valid_;
};

struct PointHandle
{
  std::size_t spine_level = 0;
  VertexAddr seed;  // spine coordinate at time 0
  BigInt time = 0;  // current time relative to the seed

  bool is_fixed() const { return seed.is_base(); }
  friend bool operator==(const PointHandle&, const PointHandle&) = default;
};

struct DistanceValue
{
  enum class Kind
  {
    Exact,          // d = 2^{-level}
    UpperBoundOnly, // columns agree on levels 0..level, so d <= 2^{-(level+1)}
  };

  Kind kind = Kind::UpperBoundOnly;
  std::size_t level = 0;

  bool is_exact() const { return kind == Kind::Exact; }
  double value() const { return std::ldexp(1.0, -static_cast<int>(is_exact() ? level : level + 1)); }
  friend bool operator==(const DistanceValue&, const DistanceValue&) = default;
};

inline std::string to_string(const DistanceValue& d)
{
  if (d.is_exact())
    return "2^-" + std::to_string(d.level);
  return "<= 2^-" + std::to_string(d.level + 1);
}

inline PointHandle fixed_point(std::size_t spine_level) { return PointHandle{spine_level, VertexAddr::base(spine_level), 0}; }

inline PointHandle make_handle(const CoverTower& tower, std::size_t spine_level, std::size_t cycle, BigInt position,
                               BigInt time = 0)
{
  PointHandle h{spine_level, VertexAddr::on_cycle(spine_level, cycle, std::move(position)), std::move(time)};
  check_address(tower, h.seed);
  return h;
}

/// Times (relative to the seed) at which the spine coordinate is determined.
inline std::pair<BigInt, BigInt> valid_time_range(const CoverTower& tower, const PointHandle& h)
{
  if (h.is_fixed())
    throw std::logic_error("a fixed-point handle is valid at every time");
  const BigInt len = tower.cycle_length(h.spine_level, h.seed.cycle);
  return {-h.seed.position, len - h.seed.position};
}

inline void require_valid_time(const CoverTower& tower, const PointHandle& h, const BigInt& time)
{
  if (h.is_fixed())
    return;
  const auto [lo, hi] = valid_time_range(tower, h);
  if (time < lo || time > hi)
    throw SpineExhausted(time, lo, hi);
}

/// Spine-level coordinate at the handle's current time.
inline VertexAddr spine_address(const CoverTower& tower, const PointHandle& h)
{
  if (h.is_fixed())
    return h.seed;
  require_valid_time(tower, h, h.time);
  const BigInt pos = h.seed.position + h.time;
  if (pos == 0 || pos == tower.cycle_length(h.spine_level, h.seed.cycle))
    return VertexAddr::base(h.spine_level);
  return VertexAddr::on_cycle(h.spine_level, h.seed.cycle, pos);
}

/// Coordinates at levels 0..depth at the current time.
inline std::vector<VertexAddr> column_of(const CoverTower& tower, const PointHandle& h, std::size_t depth)
{
  if (depth > h.spine_level)
    throw std::invalid_argument("depth " + std::to_string(depth) + " exceeds spine level " +
                                std::to_string(h.spine_level));
  std::vector<VertexAddr> column(depth + 1);
  VertexAddr a = spine_address(tower, h);
  while (a.level > depth)
    a = a.is_base() ? VertexAddr::base(a.level - 1) : project_addr(tower, a);
  for (;;) {
    column[a.level] = a;
    if (a.level == 0)
      break;
    a = a.is_base() ? VertexAddr::base(a.level - 1) : project_addr(tower, a);
  }
  return column;
}

inline PointHandle step(const CoverTower& tower, const PointHandle& h, const BigInt& delta)
{
  PointHandle out = h;
  out.time += delta;
  require_valid_time(tower, out, out.time);
  return out;
}

inline DistanceValue distance(const CoverTower& tower, const PointHandle& a, const PointHandle& b)
{
  const std::size_t depth = std::min(a.spine_level, b.spine_level);
  const auto ca = column_of(tower, a, depth);
  const auto cb = column_of(tower, b, depth);
  for (std::size_t level = 1; level <= depth; ++level) {
    if (ca[level] != cb[level])
      return {DistanceValue::Kind::Exact, level};
  }
  return {DistanceValue::Kind::UpperBoundOnly, depth};
}

/// Smallest delta >= 0 with the level-m coordinate at the base.
inline BigInt next_base_time(const CoverTower& tower, const PointHandle& h, std::size_t level)
{
  if (level > h.spine_level)
    throw std::invalid_argument("target level above the spine");
  const VertexAddr a = column_of(tower, h, level)[level];
  if (a.is_base())
    return 0;
  return tower.cycle_length(level, a.cycle) - a.position;
}

// ---------------------------------------------------------------------------
// Segment walk

/// A maximal stretch of times during which a coordinate is either at the base
/// or advancing along one cycle. `start` is relative to the walk's first time;
/// on a cycle the coordinate at time start+u is position + u.
struct Segment
{
  BigInt start = 0;
  BigInt length = 0;
  std::size_t cycle = 0;
  BigInt position = 0;

  bool is_base() const { return cycle == 0; }
};

namespace detail {

// Emits level-`target` segments for the vertices at offsets [lo, hi) of
// c_{level,cycle}. `t0` is the walk time of offset lo.
template <class Emit>
bool walk_cycle(const CoverTower& tower, std::size_t level, std::size_t cycle, const BigInt& lo, const BigInt& hi,
                const BigInt& t0, std::size_t target, Emit& emit)
{
  const PathExpr& f = tower.image_formula(level - 1, cycle);
  const auto atoms = f.atom_lengths();
  bool keep_going = true;
  f.for_each_run(lo, [&](const Run& run, const BigInt& s) {
    if (s >= hi)
      return false;
    const BigInt len = atoms[run.cycle];
    const BigInt end = s + run.count * len;
    const BigInt a = std::max(lo, s);
    const BigInt b = std::min(hi, end);
    if (run.is_edge()) {
      keep_going = emit(Segment{t0 + (a - lo), b - a, 0, 0});
      return keep_going;
    }
    for (BigInt q = (a - s) / len; keep_going && s + q * len < b; ++q) {
      const BigInt copy = s + q * len;
      BigInt x = std::max(a, copy);
      const BigInt y = std::min(b, copy + len);
      if (level - 1 == target) {
        if (x == copy) {
          keep_going = emit(Segment{t0 + (x - lo), 1, 0, 0});
          ++x;
        }
        if (keep_going && x < y)
          keep_going = emit(Segment{t0 + (x - lo), y - x, run.cycle, x - copy});
      } else {
        keep_going = walk_cycle(tower, level - 1, run.cycle, x - copy, y - copy, t0 + (x - lo), target, emit);
      }
    }
    return keep_going;
  });
  return keep_going;
}

} // namespace detail

/// Level-`level` segments covering times [from, from + count) of the handle's
/// orbit, in order, with adjacent base stretches merged. `f` returns false to
/// stop early. Segment starts are relative to `from`.
template <class F>
void walk_segments(const CoverTower& tower, const PointHandle& h, const BigInt& from, const BigInt& count,
                   std::size_t level, F&& f)
{
  if (level > h.spine_level)
    throw std::invalid_argument("target level above the spine");
  if (count <= 0)
    return;
  const BigInt begin = h.time + from;
  const BigInt last = begin + count - 1;
  require_valid_time(tower, h, begin);
  require_valid_time(tower, h, last);
  if (h.is_fixed()) {
    f(Segment{0, count, 0, 0});
    return;
  }

  std::optional<Segment> pending;
  bool stopped = false;
  auto emit = [&](const Segment& s) {
    if (pending && pending->is_base() && s.is_base() && pending->start + pending->length == s.start) {
      pending->length += s.length;
      return true;
    }
    if (pending && !f(*pending)) {
      stopped = true;
      pending.reset();
      return false;
    }
    pending = s;
    return true;
  };

  const std::size_t spine = h.spine_level;
  const std::size_t cycle = h.seed.cycle;
  const BigInt len = tower.cycle_length(spine, cycle);
  const BigInt lo = h.seed.position + begin;
  const BigInt hi_incl = h.seed.position + last;
  const BigInt hi = std::min(BigInt(hi_incl + 1), len);
  bool go = true;
  if (lo < hi) {
    if (level == spine) {
      BigInt x = lo;
      if (x == 0) {
        go = emit(Segment{0, 1, 0, 0});
        ++x;
      }
      if (go && x < hi)
        go = emit(Segment{x - lo, hi - x, cycle, x});
    } else {
      go = detail::walk_cycle(tower, spine, cycle, lo, hi, 0, level, emit);
    }
  }
  if (go && hi_incl == len)
    emit(Segment{len - lo, 1, 0, 0});
  if (pending && !stopped)
    f(*pending);
}

/// Collects all segments of a window.
inline std::vector<Segment> segments_of(const CoverTower& tower, const PointHandle& h, const BigInt& from,
                                        const BigInt& count, std::size_t level)
{
  std::vector<Segment> out;
  walk_segments(tower, h, from, count, level, [&](const Segment& s) {
    out.push_back(s);
    return true;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Random handles

/// Seeded handle generator. The cycle index is drawn with weight 2^{-i}
/// (i = 1..M); the position is uniform in [1, |c| - reserve] so that at least
/// `reserve` forward steps stay valid.
class HandleSampler
{
public:
  HandleSampler(const CoverTower& tower, std::size_t spine_level, BigInt reserve, std::uint64_t seed)
    : tower_(tower), spine_(spine_level), reserve_(std::move(reserve)), rng_(seed)
  {
    const auto s = tower_.spec(spine_);
    for (std::size_t i = 1; i <= s->cycle_count(); ++i) {
      if (s->cycle_length(i) - 1 >= reserve_ + 1)
        eligible_.push_back(i);
    }
    if (eligible_.empty())
      throw std::invalid_argument("no cycle at level " + std::to_string(spine_) + " can reserve the horizon");
  }

  PointHandle next()
  {
    std::size_t cycle = eligible_.back();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng_);
    double total = 0.0;
    for (std::size_t k = 0; k < eligible_.size(); ++k)
      total += std::ldexp(1.0, -static_cast<int>(k + 1));
    double acc = 0.0;
    for (std::size_t k = 0; k < eligible_.size(); ++k) {
      acc += std::ldexp(1.0, -static_cast<int>(k + 1)) / total;
      if (u < acc) {
        cycle = eligible_[k];
        break;
      }
    }
    const BigInt hi = tower_.cycle_length(spine_, cycle) - reserve_;
    return PointHandle{spine_, VertexAddr::on_cycle(spine_, cycle, uniform(1, hi)), 0};
  }

  /// Uniform integer in [lo, hi].
  BigInt uniform(const BigInt& lo, const BigInt& hi)
  {
    boost::random::uniform_int_distribution<BigInt> dist(lo, hi);
    return dist(rng_);
  }

  std::mt19937_64& engine() { return rng_; }

private:
  const CoverTower& tower_;
  std::size_t spine_;
  BigInt reserve_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> eligible_;
};

// ---------------------------------------------------------------------------
// Orbit traces

inline nlohmann::json to_json(const VertexAddr& a)
{
  return {{"level", a.level}, {"cycle", a.cycle}, {"position", to_decimal(a.position)}};
}

inline nlohmann::json to_json(const PointHandle& h)
{
  return {{"spine_level", h.spine_level}, {"seed", to_json(h.seed)}, {"time", to_decimal(h.time)}};
}

inline nlohmann::json to_json(const DistanceValue& d)
{
  return {{"kind", d.is_exact() ? "exact" : "upper_bound_only"}, {"level", d.level}, {"value", d.value()}};
}

/// CSV: t, then per level n <= depth the cycle index (0 = base) and position.
inline void write_orbit_csv(std::ostream& os, const CoverTower& tower, const PointHandle& h, std::size_t depth,
                            const BigInt& horizon)
{
  os << "t";
  for (std::size_t n = 0; n <= depth; ++n)
    os << ",cycle_" << n << ",pos_" << n;
  os << "\n";
  for (BigInt dt = 0; dt <= horizon; ++dt) {
    const auto column = column_of(tower, step(tower, h, dt), depth);
    os << to_decimal(h.time + dt);
    for (const auto& a : column)
      os << "," << a.cycle << "," << to_decimal(a.position);
    os << "\n";
  }
}

inline void write_orbit_jsonl(std::ostream& os, const CoverTower& tower, const PointHandle& h, std::size_t depth,
                              const BigInt& horizon)
{
  for (BigInt dt = 0; dt <= horizon; ++dt) {
    const auto column = column_of(tower, step(tower, h, dt), depth);
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& a : column)
      levels.push_back({{"cycle", a.cycle}, {"position", to_decimal(a.position)}});
    os << nlohmann::json{{"t", to_decimal(h.time + dt)}, {"levels", levels}}.dump() << "\n";
  }
}

} // namespace chaoscope
