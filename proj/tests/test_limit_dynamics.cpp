#include <sstream>

#include <gtest/gtest.h>

#include "chaoscope/chaos_analysis.hpp"
#include "chaoscope/limit_dynamics.hpp"
#include "support.hpp"

using namespace chaoscope;

namespace {

const CoverTower& T() { return builtin_tower(); }

bool all_base(const std::vector<VertexAddr>& column)
{
  return std::all_of(column.begin(), column.end(), [](const VertexAddr& a) { return a.is_base(); });
}

} // namespace

TEST(FixedPoint, ColumnIsBaseAndStepDoesNothing)
{
  const auto p = fixed_point(5);
  EXPECT_TRUE(all_base(column_of(T(), p, 5)));
  EXPECT_TRUE(all_base(column_of(T(), step(T(), p, 1), 5)));
  EXPECT_TRUE(all_base(column_of(T(), step(T(), p, 1'000'000'000), 5)));
  EXPECT_TRUE(all_base(column_of(T(), step(T(), p, -12345), 5)));
  const auto d = distance(T(), fixed_point(5), fixed_point(9));
  EXPECT_EQ(d.kind, DistanceValue::Kind::UpperBoundOnly);
  EXPECT_EQ(d.level, 5u);
  EXPECT_THROW(valid_time_range(T(), p), std::logic_error);
}

TEST(Column, Examples)
{
  const auto h = make_handle(T(), 2, 1, 1);
  EXPECT_EQ(column_of(T(), h, 2),
            (std::vector<VertexAddr>{VertexAddr::base(0), VertexAddr::base(1), VertexAddr::on_cycle(2, 1, 1)}));
  EXPECT_EQ(column_of(T(), step(T(), h, 1), 2)[1], VertexAddr::on_cycle(1, 1, 1));
  EXPECT_TRUE(column_of(T(), make_handle(T(), 2, 2, 7), 2)[1].is_base());
  EXPECT_THROW(column_of(T(), h, 3), std::invalid_argument);
}

TEST(Column, MatchesMaterializedWalk)
{
  // walk the explicit G_3 along cycle 1 and compare the mapped vertices with
  // the columns of a handle advanced by random access
  const auto& l3 = testing_support::level(3);
  const auto& l2 = testing_support::level(2);
  const auto& l1 = testing_support::level(1);
  const auto h = make_handle(T(), 3, 1, 1);
  for (std::uint64_t t = 0; t < 20'000; t += 7) {
    const auto column = column_of(T(), step(T(), h, t), 3);
    const auto v3 = l3.layout.id_of(1, 1 + t);
    const auto v2 = (*l3.cover_down)(v3);
    const auto v1 = (*l2.cover_down)(v2);
    ASSERT_EQ(l3.layout.id_of(column[3]), v3);
    ASSERT_EQ(l2.layout.id_of(column[2]), v2);
    ASSERT_EQ(l1.layout.id_of(column[1]), v1);
  }
}

TEST(Column, CoherentUnderProjection)
{
  HandleSampler sampler(T(), 8, 1000, 21);
  for (int s = 0; s < 200; ++s) {
    const auto h = step(T(), sampler.next(), sampler.uniform(0, 999));
    const auto column = column_of(T(), h, 8);
    for (std::size_t n = 0; n < 8; ++n) {
      const VertexAddr down = column[n + 1].is_base() ? VertexAddr::base(n) : project_addr(column[n + 1]);
      ASSERT_EQ(down, column[n]);
    }
  }
}

TEST(Step, ValidityRange)
{
  const auto h = make_handle(T(), 2, 1, 1);
  const auto [lo, hi] = valid_time_range(T(), h);
  EXPECT_EQ(lo, -1);
  EXPECT_EQ(hi, 694);
  EXPECT_NO_THROW(step(T(), h, 694));
  EXPECT_TRUE(spine_address(T(), step(T(), h, 694)).is_base());
  EXPECT_TRUE(spine_address(T(), step(T(), h, -1)).is_base());
  try {
    step(T(), h, 695);
    FAIL() << "expected SpineExhausted";
  } catch (const SpineExhausted& e) {
    EXPECT_EQ(e.time(), 695);
    EXPECT_EQ(e.last_valid(), 694);
  }
  EXPECT_THROW(step(T(), h, -2), SpineExhausted);
}

TEST(Step, RoundTripAndComposition)
{
  HandleSampler sampler(T(), 8, 1'000'000, 4);
  for (int s = 0; s < 500; ++s) {
    const auto h = sampler.next();
    const BigInt a = sampler.uniform(1, 500'000);
    const BigInt b = sampler.uniform(1, 500'000);
    EXPECT_EQ(step(T(), step(T(), h, 7), -7), h);
    EXPECT_EQ(column_of(T(), step(T(), step(T(), h, a), b), 8), column_of(T(), step(T(), h, a + b), 8));
    EXPECT_EQ(column_of(T(), step(T(), step(T(), h, a), -a), 8), column_of(T(), h, 8));
  }
}

TEST(Step, SingleStepsAgreeWithRandomAccess)
{
  HandleSampler sampler(T(), 6, 2000, 8);
  for (int s = 0; s < 5; ++s) {
    const auto start = sampler.next();
    auto h = start;
    for (int t = 1; t <= 1000; ++t) {
      h = step(T(), h, 1);
      ASSERT_EQ(column_of(T(), h, 6), column_of(T(), step(T(), start, t), 6));
    }
  }
}

TEST(Distance, Examples)
{
  const auto h = make_handle(T(), 2, 1, 1);
  EXPECT_EQ(distance(T(), h, h).kind, DistanceValue::Kind::UpperBoundOnly);
  const auto d = distance(T(), h, fixed_point(2));
  EXPECT_TRUE(d.is_exact());
  EXPECT_EQ(d.level, 2u);
  EXPECT_DOUBLE_EQ(d.value(), 0.25);
  const auto e = distance(T(), make_handle(T(), 3, 1, 5), make_handle(T(), 3, 1, 6));
  EXPECT_TRUE(e.is_exact());
  EXPECT_EQ(to_string(DistanceValue{DistanceValue::Kind::Exact, 3}), "2^-3");
}

TEST(Distance, FirstDifferenceAtLevelThree)
{
  // same level-2 coordinate (base), different level-3 cycles
  const auto a = make_handle(T(), 3, 2, 1);
  const auto b = make_handle(T(), 3, 3, 1);
  const auto ca = column_of(T(), a, 3);
  const auto cb = column_of(T(), b, 3);
  ASSERT_EQ(ca[2], cb[2]);
  const auto d = distance(T(), a, b);
  EXPECT_TRUE(d.is_exact());
  EXPECT_EQ(d.level, 3u);
  EXPECT_DOUBLE_EQ(d.value(), 0.125);
}

TEST(NextBaseTime, Examples)
{
  EXPECT_EQ(next_base_time(T(), make_handle(T(), 1, 1, 3), 1), 7);
  EXPECT_EQ(next_base_time(T(), make_handle(T(), 2, 1, 2), 1), 9);
  EXPECT_EQ(next_base_time(T(), make_handle(T(), 2, 2, 7), 1), 0);
  EXPECT_THROW(next_base_time(T(), make_handle(T(), 2, 2, 7), 3), std::invalid_argument);
}

TEST(NextBaseTime, AgreesWithLinearScanAndGapBound)
{
  HandleSampler sampler(T(), 7, 5000, 17);
  for (int s = 0; s < 40; ++s) {
    const auto h = sampler.next();
    for (std::size_t m : {1u, 2u}) {
      const BigInt bound = T().cycle_length(m, 1);
      BigInt t = 0;
      while (t < 4000) {
        const BigInt wait = next_base_time(T(), step(T(), h, t), m);
        BigInt scan = 0;
        while (!column_of(T(), step(T(), h, t + scan), m)[m].is_base())
          ++scan;
        ASSERT_EQ(wait, scan);
        ASSERT_LE(wait, bound);
        t += wait + 1;
      }
    }
  }
}

TEST(Segments, MatchPointwiseColumns)
{
  HandleSampler sampler(T(), 8, 3000, 99);
  for (int s = 0; s < 20; ++s) {
    const auto h = sampler.next();
    for (std::size_t level : {1u, 2u, 3u}) {
      const auto segs = segments_of(T(), h, 0, 2000, level);
      BigInt covered = 0;
      for (const auto& seg : segs) {
        ASSERT_EQ(seg.start, covered);
        for (BigInt u = 0; u < seg.length; u += 37) {
          const auto a = column_of(T(), step(T(), h, seg.start + u), level)[level];
          if (seg.is_base())
            ASSERT_TRUE(a.is_base());
          else
            ASSERT_EQ(a, VertexAddr::on_cycle(level, seg.cycle, seg.position + u));
        }
        covered += seg.length;
      }
      ASSERT_EQ(covered, 2000);
    }
  }
}

TEST(Sampler, DeterministicAndInRange)
{
  HandleSampler a(T(), 8, 100, 5);
  HandleSampler b(T(), 8, 100, 5);
  for (int s = 0; s < 100; ++s) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_GE(x.seed.position, 1);
    EXPECT_LE(x.seed.position, T().cycle_length(8, x.seed.cycle) - 100);
  }
  EXPECT_THROW(HandleSampler(T(), 1, 100, 0), std::invalid_argument);
}

TEST(OrbitExport, CsvRows)
{
  std::ostringstream os;
  write_orbit_csv(os, T(), make_handle(T(), 2, 1, 1), 1, 3);
  EXPECT_EQ(os.str(), "t,cycle_0,pos_0,cycle_1,pos_1\n"
                      "0,0,0,0,0\n"
                      "1,0,0,1,1\n"
                      "2,0,0,1,2\n"
                      "3,0,0,1,3\n");
}

TEST(OrbitExport, JsonlHasSameFields)
{
  std::ostringstream os;
  write_orbit_jsonl(os, T(), make_handle(T(), 2, 1, 1), 1, 1);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["t"], "0");
  std::getline(in, line);
  j = nlohmann::json::parse(line);
  EXPECT_EQ(j["levels"][1]["cycle"], 1);
  EXPECT_EQ(j["levels"][1]["position"], "1");
}
