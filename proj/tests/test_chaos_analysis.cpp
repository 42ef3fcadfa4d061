#include <gtest/gtest.h>

#include "chaoscope/chaos_analysis.hpp"
#include "support.hpp"

using namespace chaoscope;

namespace {

const CoverTower& T() { return builtin_tower(); }

} // namespace

TEST(Degree, Values)
{
  EXPECT_TRUE(degree_of_column(T(), fixed_point(6), 6).is_infinite());
  EXPECT_EQ(degree_of_column(T(), make_handle(T(), 2, 1, 1), 2), DegreeValue::finite(1));
  EXPECT_EQ(min_degree({VertexAddr::base(0), VertexAddr::base(1), VertexAddr::on_cycle(2, 1, 5),
                        VertexAddr::on_cycle(3, 2, 9)}),
            DegreeValue::finite(1));
  EXPECT_EQ(min_degree({VertexAddr::base(0), VertexAddr::on_cycle(3, 2, 9)}), DegreeValue::finite(2));
  EXPECT_TRUE(DegreeValue::finite(7) < DegreeValue::infinite());
  EXPECT_FALSE(DegreeValue::infinite() < DegreeValue::finite(7));
  EXPECT_EQ(to_string(DegreeValue::infinite()), "inf");
}

TEST(Degree, MonotoneInDepth)
{
  HandleSampler sampler(T(), 9, 1, 2);
  for (int s = 0; s < 500; ++s) {
    const auto h = sampler.next();
    DegreeValue previous = DegreeValue::infinite();
    for (std::size_t n = 0; n <= 9; ++n) {
      const auto d = degree_of_column(T(), h, n);
      ASSERT_FALSE(previous < d);
      previous = d;
    }
  }
}

TEST(DegreeWindow, ZeroWindowIsCurrentCoordinate)
{
  const auto h = make_handle(T(), 3, 1, 100);
  const auto a = column_of(T(), h, 3)[2];
  EXPECT_EQ(degree_window_min(T(), h, 2, 0, 0), DegreeValue::of(a));
}

TEST(DegreeWindow, DegreeOneHandlesReachLevelTwoCycles)
{
  HandleSampler sampler(T(), 6, 1, 31);
  int checked = 0;
  for (int s = 0; s < 300 && checked < 30; ++s) {
    const auto h = sampler.next();
    if (h.seed.cycle != 1)
      continue;
    const auto& f = T().image_formula(5, 1);
    const auto next = f.next_run_of(2, h.seed.position);
    if (!next)
      continue;
    const BigInt window = *next + T().cycle_length(5, 2) - h.seed.position;
    const auto d = degree_window_min(T(), h, 2, 0, window, 2);
    ASSERT_FALSE(d.is_infinite());
    EXPECT_LE(*d.index, 2u);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(Proximal, CertificateExamples)
{
  const auto h = make_handle(T(), 2, 1, 2);
  const auto hits = proximal_certificate(T(), h, 1, {{0, 10}});
  ASSERT_EQ(hits.size(), 1u);
  ASSERT_TRUE(hits[0].first_hit);
  EXPECT_EQ(*hits[0].first_hit, 9);

  const auto p = proximal_certificate(T(), fixed_point(4), 3, {{0, 1}, {100, 5}});
  EXPECT_EQ(*p[0].first_hit, 0);
  EXPECT_EQ(*p[1].first_hit, 100);

  HandleSampler sampler(T(), 5, 200, 3);
  for (int s = 0; s < 50; ++s) {
    const auto x = sampler.next();
    for (const auto& w : proximal_certificate(T(), x, 1, {{0, 11}, {11, 11}, {22, 11}}))
      EXPECT_TRUE(w.first_hit.has_value());
  }
}

TEST(Proximal, ShortWindowCanMiss)
{
  const auto h = make_handle(T(), 2, 1, 2);
  const auto hits = proximal_certificate(T(), h, 1, {{0, 5}});
  EXPECT_FALSE(hits[0].first_hit.has_value());
}

TEST(Proximal, WindowBeyondSpineThrows)
{
  const auto h = make_handle(T(), 2, 1, 600);
  EXPECT_THROW(proximal_certificate(T(), h, 1, {{0, 200}}), SpineExhausted);
}

TEST(LiYorke, FixedPointPairIsProximal)
{
  HandleSampler sampler(T(), 6, 10'000, 12);
  for (int s = 0; s < 20; ++s) {
    const auto x = sampler.next();
    const auto rep = li_yorke_test(T(), x, fixed_point(6), 10'000, 2, 3);
    ASSERT_TRUE(rep.proximal.has_value());
    EXPECT_LE(rep.proximal->distance.value(), 0.125);
    const auto again = distance(T(), step(T(), x, rep.proximal->time), fixed_point(6));
    EXPECT_EQ(again, rep.proximal->distance);
  }
}

TEST(LiYorke, IdenticalHandlesNeverSeparate)
{
  const auto h = make_handle(T(), 4, 1, 12345);
  const auto rep = li_yorke_test(T(), h, h, 5000, 2, 3);
  EXPECT_FALSE(rep.separation.has_value());
  ASSERT_TRUE(rep.proximal.has_value());
  EXPECT_EQ(rep.proximal->time, 0);
}

TEST(LiYorke, DifferentLevelThreeCyclesSeparate)
{
  const auto a = make_handle(T(), 3, 2, 1);
  const auto b = make_handle(T(), 3, 3, 1);
  const auto rep = li_yorke_test(T(), a, b, 150, 2, 3);
  ASSERT_TRUE(rep.separation.has_value());
  EXPECT_TRUE(rep.separation->distance.is_exact());
  EXPECT_LE(rep.separation->distance.level, 3u);
}

TEST(LiYorke, WitnessesMatchPointwiseSearch)
{
  HandleSampler sampler(T(), 4, 3000, 77);
  for (int s = 0; s < 10; ++s) {
    const auto a = sampler.next();
    const auto b = sampler.next();
    const auto rep = li_yorke_test(T(), a, b, 2000, 2, 3);
    std::optional<BigInt> prox, sep;
    for (BigInt t = 0; t <= 2000 && (!prox || !sep); ++t) {
      const auto d = distance(T(), step(T(), a, t), step(T(), b, t));
      if (!prox && (!d.is_exact() || d.level > 2))
        prox = t;
      if (!sep && d.is_exact() && d.level <= 3)
        sep = t;
    }
    EXPECT_EQ(rep.proximal.has_value(), prox.has_value());
    if (prox && rep.proximal)
      EXPECT_EQ(rep.proximal->time, *prox);
    EXPECT_EQ(rep.separation.has_value(), sep.has_value());
    if (sep && rep.separation)
      EXPECT_EQ(rep.separation->time, *sep);
  }
}

TEST(Classify, Verdicts)
{
  const auto fixed = classify_pair(T(), fixed_point(4), fixed_point(4));
  EXPECT_EQ(fixed.verdict, PairClassification::Verdict::Fixed);

  const auto h = make_handle(T(), 4, 1, 1000);
  EXPECT_EQ(classify_pair(T(), h, h).verdict, PairClassification::Verdict::Identical);

  const auto one = make_handle(T(), 4, 1, 1000);
  const auto two = make_handle(T(), 4, 2, 50);
  const auto c = classify_pair(T(), one, two, LiYorkeParams{1000, 2, 3});
  EXPECT_EQ(c.verdict, PairClassification::Verdict::ExpectedLiYorke);
  EXPECT_EQ(c.degree_a, DegreeValue::finite(1));
  EXPECT_EQ(c.degree_b, DegreeValue::finite(2));
  EXPECT_NE(std::find(c.citations.begin(), c.citations.end(), "points of different degree are never asymptotic"),
            c.citations.end());
  ASSERT_TRUE(c.evidence.has_value());

  const auto same = classify_pair(T(), make_handle(T(), 4, 1, 1000), make_handle(T(), 4, 1, 2000));
  EXPECT_NE(std::find(same.citations.begin(), same.citations.end(), "an asymptotic pair of equal degree must coincide"),
            same.citations.end());
  EXPECT_EQ(to_json(same)["verdict"], "expected-li-yorke");
}

TEST(Mixing, OneLevelUp)
{
  const auto r = mixing_gap_report(T(), 1, 1);
  EXPECT_EQ(r.missing_gaps, std::vector<BigInt>{1});
  EXPECT_TRUE(r.prefix_ok);
  EXPECT_TRUE(r.suffix_ok);
  EXPECT_EQ(r.suffix_bound, 21);
  EXPECT_EQ(r.occurrences.suffix.edges, 2);
  EXPECT_EQ(r.k_bound, 22);
  EXPECT_EQ(r.return_lengths.front(), 10);
  EXPECT_EQ(r.return_lengths.back(), 32);
  EXPECT_EQ(to_json(r)["deviation_from_claim"], true);
}

TEST(Mixing, TwoLevelsUp)
{
  const auto r = mixing_gap_report(T(), 1, 2);
  const auto gaps = r.gap_set();
  for (int g : {0, 2, 3})
    EXPECT_TRUE(gaps.count(g)) << g;
  for (int g = 5; g <= 100; ++g)
    EXPECT_TRUE(gaps.count(g)) << g;
  EXPECT_TRUE(r.prefix_ok);
  EXPECT_TRUE(r.suffix_ok);
  EXPECT_EQ(r.suffix_bound, 1570);
  EXPECT_EQ(r.missing_gaps, std::vector<BigInt>{1});
}

TEST(Mixing, RejectsBadArguments)
{
  EXPECT_THROW(mixing_gap_report(T(), 0, 1), std::invalid_argument);
  EXPECT_THROW(mixing_gap_report(T(), 1, 3, 1000), BudgetExceeded);
}

TEST(Semigroup, Frobenius)
{
  const std::vector<std::uint64_t> gens{10, 12, 13};
  EXPECT_EQ(frobenius_number(gens), 41);
  const std::vector<std::uint64_t> two{3, 5};
  EXPECT_EQ(frobenius_number(two), 7);
  const std::vector<std::uint64_t> even{4, 6};
  EXPECT_FALSE(frobenius_number(even).has_value());
  const std::vector<std::uint64_t> one{1, 9};
  EXPECT_EQ(frobenius_number(one), -1);
}

TEST(Stability, CorpusPasses)
{
  const auto corpus = sample_handles(T(), 8, 1, 42, 200);
  const auto rep = degree_stability_check(T(), corpus);
  EXPECT_TRUE(rep.passed()) << (rep.failures.empty() ? "" : rep.failures.front());
  EXPECT_GT(rep.checked, 0u);
  EXPECT_EQ(rep.checked + rep.skipped, corpus.size());
}

TEST(Stability, FixedPointIsTriviallyStable)
{
  const auto rep = degree_stability_check(T(), {fixed_point(5)});
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.checked, 1u);
}

TEST(Structure, EveryCycleVisitsBase)
{
  for (std::size_t n = 0; n <= 3; ++n)
    EXPECT_TRUE(every_cycle_visits_base(*testing_support::level(n).graph)) << n;
  EXPECT_FALSE(every_cycle_visits_base(graph::MaterializedGraph(3, {{0, 0}, {1, 2}, {2, 1}})));
}

TEST(Structure, NoSampledPointIsPeriodic)
{
  HandleSampler sampler(T(), 6, 10'001, 9);
  for (int s = 0; s < 5; ++s) {
    const auto h = sampler.next();
    const auto start = column_of(T(), h, 6);
    for (BigInt q = 1; q <= 10'000; ++q)
      ASSERT_NE(column_of(T(), step(T(), h, q), 6), start);
  }
}

TEST(Seeds, DerivedStreamsDiffer)
{
  EXPECT_NE(derive_seed(0, 0), derive_seed(0, 1));
  EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}
