#include <doctest.h>

#include <set>

#include "instances.hpp"
#include "km/error.hpp"
#include "km/io.hpp"
#include "km/pipelines.hpp"
#include "oracles.hpp"

using namespace km;

namespace {

// Ordered (x, d) pairs with x, x + d, x + 2d in A, over the integers.
std::uint64_t integer_3aps(const std::vector<std::int64_t>& a) {
  const std::set<std::int64_t> s(a.begin(), a.end());
  std::uint64_t c = 0;
  for (auto x : a) {
    for (auto y : a) c += s.count(2 * y - x);
  }
  return c;
}

}  // namespace

TEST_CASE("Behrend constructions") {
  CHECK(behrend(1, BehrendStrategy::Ternary).elements == std::vector<std::int64_t>{1});
  CHECK(behrend(1, BehrendStrategy::Sphere).elements == std::vector<std::int64_t>{1});
  CHECK(behrend(14, BehrendStrategy::Ternary).elements == std::vector<std::int64_t>{1, 2, 4, 5, 10, 11, 13, 14});
  CHECK_THROWS_AS(behrend(0, BehrendStrategy::Ternary), DomainError);
  for (std::int64_t n : {100, 1000}) {
    for (auto st : {BehrendStrategy::Ternary, BehrendStrategy::Sphere}) {
      const BehrendSet b = behrend(n, st);
      CHECK(integer_3aps(b.elements) == b.elements.size());
      CHECK(is_ap_free(b.elements));
      CHECK(b.elements.front() >= 1);
      CHECK(b.elements.back() <= n);
    }
  }
  const std::int64_t bad[] = {1, 2, 3};
  CHECK_FALSE(is_ap_free(bad));
}

TEST_CASE("Behrend sphere set for N = 10^4 matches the golden record") {
  const BehrendSet b = behrend(10000, BehrendStrategy::Sphere);
  CHECK(is_ap_free(b.elements));
  const json rec = {{"n", 10000},
                    {"size", b.elements.size()},
                    {"dim", b.dim},
                    {"digits", b.digits},
                    {"radius", b.radius},
                    {"digest", digest(integer_set_to_json({b.n, b.elements}))}};
  const json want = fixtures::golden("behrend_sphere_10000.json", rec);
  REQUIRE_FALSE(want.is_null());
  CHECK(rec == want);
}

TEST_CASE("interval embedding preserves 3-AP counts") {
  const std::int64_t a[] = {1, 3, 5};
  const Embedded e = embed_interval(a, 5);
  CHECK(e.group.size() == 16);
  CHECK(e.set.indices() == std::vector<std::size_t>{1, 3, 5});
  CHECK(count_3aps(e.set) == 5);
  CHECK(embed_interval(std::span<const std::int64_t>{}, 5).set.empty());

  const BehrendSet b = behrend(100, BehrendStrategy::Sphere);
  CHECK(count_3aps(embed_interval(b.elements, 100).set) == b.elements.size());

  Rng rng(41);
  for (int t = 0; t < 200; ++t) {
    const auto n = rng.between(1, 2000);
    std::vector<std::int64_t> s;
    const double density = rng.uniform(0.001, 0.05);
    for (std::int64_t x = 1; x <= n; ++x) {
      if (rng.coin(density)) s.push_back(x);
    }
    CHECK(count_3aps(embed_interval(s, n).set) == integer_3aps(s));
  }
}

TEST_CASE("longest progressions in cyclic sets") {
  const APRun all = longest_ap(GSet::full(Group::cyclic(9)));
  CHECK(all.length == 9);
  const APRun r = longest_ap(oracle::cyclic_set(7, {0, 2, 4, 5}));
  CHECK(r.start == 5);
  CHECK(r.step == 2);
  CHECK(r.length == 4);
  CHECK(longest_ap(oracle::cyclic_set(7, {0})).length == 1);
}

TEST_CASE("F_3^n driver") {
  const Group g = Group::parse("Z3^2");
  FfqTrace full = roth_ffq_driver(GSet::full(g), 0.25);
  CHECK(full.steps.empty());
  CHECK(full.terminal == Terminal::NearUniform);
  CHECK(full.final_3aps == 81);

  GSet cap(g);
  for (std::size_t i : {0u, 1u, 3u, 4u}) cap.insert(i);
  REQUIRE(count_3aps(cap) == cap.card());
  const FfqTrace t = roth_ffq_driver(cap, 0.25);
  CHECK(replay_ffq(cap, t).ok);
  const GSet final_cell = pull_back(cap, t.origin, t.basis);
  CHECK(final_cell.card() == t.final_count);
  CHECK(t.final_3aps == t.final_count);

  // Densities strictly increase along a trace.
  Rng rng(42);
  const Group g3 = Group::parse("Z3^3");
  for (int k = 0; k < 5; ++k) {
    const GSet a = fixtures::random_subset(rng, GSet::full(g3), 0.6);
    const FfqTrace tr = roth_ffq_driver(a, 0.25);
    double prev = a.density();
    for (const auto& s : tr.steps) {
      CHECK(s.density > prev);
      prev = s.density;
    }
    CHECK(replay_ffq(a, tr).ok);
  }
}

TEST_CASE("F_3^n traces survive a JSON round trip") {
  const Group g = Group::parse("Z3^2");
  GSet a(g);
  for (std::size_t i : {0u, 1u, 2u, 3u, 4u, 6u}) a.insert(i);
  const FfqTrace t = roth_ffq_driver(a, 0.25);
  const json j = ffq_trace_to_json(t);
  CHECK(ffq_trace_to_json(ffq_trace_from_json(j)) == j);
  CHECK(replay_ffq(a, ffq_trace_from_json(j)).ok);
}

TEST_CASE("Z/NZ driver") {
  std::vector<std::int64_t> interval;
  for (std::int64_t x = 1; x <= 30; ++x) interval.push_back(x);
  const ZnzTrace whole = roth_znz_driver(interval, 30, 0.25);
  CHECK(whole.group.size() % 2 == 1);

  const BehrendSet b = behrend(100, BehrendStrategy::Sphere);
  const ZnzTrace t = roth_znz_driver(b.elements, 100, 0.25);
  CHECK(t.group.size() == 301);
  GSet a(t.group);
  for (auto x : b.elements) a.insert(static_cast<std::size_t>(x));
  CHECK(replay_znz(a, t).ok);
  const json j = znz_trace_to_json(t);
  CHECK(znz_trace_to_json(znz_trace_from_json(j)) == j);
  const json want = fixtures::golden("znz_trace_behrend100.json", j);
  REQUIRE_FALSE(want.is_null());
  CHECK(j == want);

  Rng rng(43);
  std::vector<std::int64_t> half;
  for (std::int64_t x = 1; x <= 50; ++x) {
    if (rng.coin(0.5)) half.push_back(x);
  }
  const ZnzTrace h = roth_znz_driver(half, 50, 0.25);
  double prev = 0;
  for (const auto& s : h.steps) {
    CHECK(s.density >= prev);
    prev = s.density;
  }
}

TEST_CASE("long progressions in A + A + A") {
  const Group z101 = Group::cyclic(101);
  const APReport full = three_sumset_ap_pipeline(GSet::full(z101), 0.25);
  CHECK(full.verified);
  CHECK(full.run.length >= 101);

  Rng rng(44);
  const GSet a = fixtures::random_subset(rng, GSet::full(z101), 0.4);
  const APReport r = three_sumset_ap_pipeline(a, 0.25);
  if (r.argument_ok) {
    CHECK(r.verified);
    const GSet aaa = sumset(sumset(a, a), a);
    CHECK(r.run.inside(aaa));
  } else {
    CHECK_FALSE(r.stage.empty());
    CHECK(r.margin < 0);
  }

  ZnzConfig tiny;
  tiny.mode = ZnzMode::Sumset;
  tiny.max_steps = 1;
  tiny.max_scan = 4;
  const GSet sparse = fixtures::random_subset(rng, GSet::full(z101), 0.05);
  const APReport s = three_sumset_ap_pipeline(sparse, 0.25, tiny);
  if (!s.argument_ok) {
    CHECK_FALSE(s.stage.empty());
    CHECK(s.margin < 0);
  }
  CHECK(least_prime_at_least(100) == 101);
  CHECK_THROWS_AS(three_sumset_ap_pipeline(GSet::full(Group::cyclic(100)), 0.25), DomainError);
}

TEST_CASE("find_smoothing_bohr success rate matches the golden record") {
  const fixtures::SmoothingTally t = fixtures::smoothing_tally();
  CHECK(t.margins_reported);
  const json rec = {{"seed", fixtures::kSmoothingSeed},
                    {"instances", fixtures::kSmoothingInstances},
                    {"freqs", 3},
                    {"found", t.found},
                    {"not_found", t.not_found}};
  const json want = fixtures::golden("smoothing_bohr_z101.json", rec);
  REQUIRE_FALSE(want.is_null());
  CHECK(rec == want);

  const fixtures::SmoothingInstance in = fixtures::smoothing_instance(7);
  SmoothingBudget none;
  none.freqs = 0;
  const SmoothingBohr same = find_smoothing_bohr(in.b, in.bp, in.b.members(), in.bp.members(), in.s, 1.0, none);
  CHECK(same.found.has_value());
}
