#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "catch_amalgamated.hpp"
#include "dragonking/distributions.hpp"
#include "dragonking/dragon_king.hpp"
#include "dragonking/monte_carlo.hpp"

using namespace dragonking;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TailModel cauchy_truth() {
  TailModel m;
  m.law = PowerTail{1.0 / std::numbers::pi, -1.0};
  return m;
}

}  // namespace

TEST_CASE("classify orders results by rank then alpha", "[dragon-king]") {
  const auto s = sample(Cauchy{0, 1}, 1000, Seed{1});
  const auto res = classify(s, cauchy_truth(), {{0.05, 0.01}, {4, 8, 12}});
  REQUIRE(res.size() == 6);
  CHECK(res[0].rank == 4);
  CHECK(res[0].alpha == 0.05);
  CHECK(res[1].rank == 4);
  CHECK(res[1].alpha == 0.01);
  CHECK(res[5].rank == 12);
}

TEST_CASE("classify uses the (k-1)/n tail value and the pointwise interval", "[dragon-king]") {
  const auto s = sample(Cauchy{0, 1}, 1000, Seed{2});
  const auto model = cauchy_truth();
  const auto res = classify(s, model, {{0.05}, {4}});
  REQUIRE(res.size() == 1);
  const auto& r = res[0];
  CHECK(r.x == s.kth_largest(4));
  CHECK(r.tail_value == 3.0 / 1000.0);
  const double m = 1.0 / (std::numbers::pi * r.x);
  CHECK_THAT(r.center, WithinRel(m, 1e-15));
  const auto ci = pointwise_ci(m, 1000, ConfidenceSpec(0.05));
  CHECK_THAT(r.lower, WithinAbs(std::max(ci.lower, 0.0), 1e-15));
  CHECK_THAT(r.upper, WithinAbs(ci.upper, 1e-15));
  const bool outside = r.tail_value < r.lower || r.tail_value > r.upper;
  CHECK((r.verdict == Verdict::dragon_king) == outside);
  CHECK_THAT(r.z_score, WithinRel((r.tail_value - m) / std::sqrt(m * (1 - m) / 1000.0), 1e-12));
}

TEST_CASE("a planted extreme observation is a dragon king", "[dragon-king]") {
  auto s0 = sample(Pareto{2, 1}, 1000, Seed{7});
  std::vector<double> v(s0.values().begin(), s0.values().end());
  // Lift the four largest values far above the power law.
  std::sort(v.begin(), v.end());
  for (std::size_t i = 0; i < 4; ++i) v[v.size() - 1 - i] *= 1e4;
  const Sample s(v);
  const auto model = fit_tail(s, {0.10, 0.01}, TailFamily::power);
  const auto res = classify(s, model, {{0.01}, {4}});
  CHECK(res[0].verdict == Verdict::dragon_king);
  CHECK(res[0].direction == Direction::above);  // 3/n sits far above M(x) out there
  CHECK(std::string(to_string(res[0].verdict)) == "dragon_king");
}

TEST_CASE("left tail classification mirrors the right tail", "[dragon-king]") {
  const auto s = sample(Cauchy{0, 1}, 1000, Seed{9});
  auto model = cauchy_truth();
  const auto right = classify(s, model, {{0.05, 0.01}, {4, 8}});
  model.side = Side::left;
  const auto left = classify(s.negated(), model, {{0.05, 0.01}, {4, 8}});
  REQUIRE(left.size() == right.size());
  for (std::size_t i = 0; i < left.size(); ++i) {
    CHECK(left[i].x == -right[i].x);
    CHECK(left[i].abscissa == right[i].abscissa);
    CHECK(left[i].tail_value == right[i].tail_value);
    CHECK(left[i].verdict == right[i].verdict);
  }
}

TEST_CASE("config validation", "[dragon-king]") {
  const auto s = sample(Cauchy{0, 1}, 50, Seed{1});
  CHECK_THROWS_AS(classify(s, cauchy_truth(), {{}, {4}}), config_error);
  CHECK_THROWS_AS(classify(s, cauchy_truth(), {{0.05}, {}}), config_error);
  CHECK_THROWS_AS(classify(s, cauchy_truth(), {{0.05}, {51}}), config_error);
  CHECK_THROWS_AS(classify(s, cauchy_truth(), {{1.5}, {4}}), config_error);
  CHECK_THROWS_AS(classify(s, cauchy_truth(), {{0.05}, {0}}), config_error);
}

TEST_CASE("digest depends on values and order", "[dragon-king]") {
  const Sample a({1.0, 2.0, 3.0});
  const Sample b({1.0, 3.0, 2.0});
  CHECK(digest(a) == digest(Sample({1.0, 2.0, 3.0})));
  CHECK(digest(a) != digest(b));
  CHECK(digest(a).rfind("fnv1a64:", 0) == 0);
  CHECK(digest(a).size() == 8 + 16);
}

TEST_CASE("full report plot grid", "[dragon-king]") {
  const auto s = sample(Pareto{2, 1}, 1000, Seed{4});
  const auto rep = full_report(s, {0.10, 0.01}, TailFamily::power, {}, 64);
  CHECK(rep.n == 1000);
  CHECK(rep.grid_points == 64);
  CHECK(rep.window_points == 90);
  CHECK(rep.plot_x.size() == 64 + 90);
  CHECK(std::is_sorted(rep.plot_x.begin(), rep.plot_x.end()));
  CHECK(rep.plot_x.back() == s.max());
  REQUIRE(rep.bands.size() == 2);
  CHECK(rep.bands[0].alpha == 0.05);
  CHECK(rep.bands[1].alpha == 0.01);
  for (std::size_t i = 0; i < rep.plot_x.size(); ++i) {
    CHECK(rep.bands[1].lower[i] <= rep.bands[0].lower[i]);
    CHECK(rep.bands[0].lower[i] <= rep.bands[0].center[i]);
    CHECK(rep.bands[0].center[i] <= rep.bands[0].upper[i]);
    CHECK(rep.bands[0].upper[i] <= rep.bands[1].upper[i]);
  }
  CHECK(rep.results.size() == 6);
  // Extra configured alphas get their own band.
  const auto more = full_report(s, {0.10, 0.01}, TailFamily::power, {{0.10}, {4}}, 16);
  REQUIRE(more.bands.size() == 3);
  CHECK(more.bands[0].alpha == 0.10);
  CHECK_THROWS_AS(full_report(s, {0.10, 0.01}, TailFamily::power, {}, 1), config_error);
}

TEST_CASE("full report is deterministic", "[dragon-king]") {
  const auto s = sample(Weibull{1, 0.5}, 800, Seed{5});
  const auto a = full_report(s, {0.25, 0.025}, TailFamily::weibull, {});
  const auto b = full_report(s, {0.25, 0.025}, TailFamily::weibull, {});
  CHECK(a.plot_x == b.plot_x);
  CHECK(a.bands[0].center == b.bands[0].center);
  CHECK(a.results.size() == b.results.size());
}
