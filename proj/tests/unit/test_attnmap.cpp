// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numeric>

#include "fixtures.hpp"
#include "probekit/attnmap.hpp"
#include "probekit/error.hpp"

using namespace probekit;

namespace {

double total(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> random_distribution(Rng& rng, std::size_t length) {
  std::vector<double> w(length);
  for (double& x : w) x = rng.uniform() + 1e-3;
  const double s = total(w);
  for (double& x : w) x /= s;
  return w;
}

}  // namespace

TEST_SUITE("attnmap") {
  TEST_CASE("uniform weights stay uniform") {
    const std::vector<double> a(4, 0.25);
    for (double v : resample(a, 8)) CHECK(v == doctest::Approx(0.125).epsilon(1e-12));
  }

  TEST_CASE("equal lengths are the identity") {
    Rng rng(1);
    const auto a = random_distribution(rng, 37);
    const auto out = resample(a, 37);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(out[i] - a[i]) <= 1e-9);
  }

  TEST_CASE("interpolated ramp is renormalized") {
    const std::vector<double> a = {1.0, 0.0, 0.0};
    const auto out = resample(a, 5);
    const std::vector<double> expected = {2.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 5; ++i) CHECK(out[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }

  TEST_CASE("a single weight is broadcast") {
    const std::vector<double> a = {1.0};
    for (double v : resample(a, 100)) CHECK(v == doctest::Approx(0.01));
  }

  TEST_CASE("resample keeps unit mass and monotone shape") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
      auto a = random_distribution(rng, 1 + rng.index(300));
      const std::size_t length = 2 + rng.index(200);
      CHECK(total(resample(a, length)) == doctest::Approx(1.0).epsilon(1e-12));
      std::sort(a.begin(), a.end(), std::greater<>());
      const auto out = resample(a, length);
      for (std::size_t t = 1; t < out.size(); ++t) CHECK(out[t] <= out[t - 1] + 1e-15);
    }
  }

  TEST_CASE("resample rejects invalid weights") {
    CHECK_THROWS_AS(resample(std::vector<double>{}, 10), ArgumentError);
    CHECK_THROWS_AS(resample(std::vector<double>{1.0}, 1), ArgumentError);
    CHECK_THROWS_AS(resample(std::vector<double>{1.2, -0.2}, 10), ValidationError);
    CHECK_THROWS_AS(resample(std::vector<double>{0.3, 0.3}, 10), ValidationError);
  }

  TEST_CASE("aggregate statistics") {
    const std::vector<std::vector<double>> single = {{0.2, 0.8}};
    auto c = aggregate(single);
    CHECK(c.values == single[0]);
    CHECK(c.std == std::vector<double>{0.0, 0.0});

    const std::vector<std::vector<double>> pair = {{1.0, 0.0}, {0.0, 1.0}};
    c = aggregate(pair);
    CHECK(c.values == std::vector<double>{0.5, 0.5});
    CHECK(c.std == std::vector<double>{0.5, 0.5});
    CHECK(c.count == 2);

    const std::vector<std::vector<double>> same(5, std::vector<double>{0.1, 0.3, 0.6});
    c = aggregate(same);
    for (double s : c.std) CHECK(s == doctest::Approx(0.0));
    CHECK_THROWS_AS(aggregate(std::vector<std::vector<double>>{{1.0}, {0.5, 0.5}}), DimensionMismatch);
    CHECK_THROWS_AS(aggregate(std::vector<std::vector<double>>{}), ArgumentError);
  }

  TEST_CASE("mean of distributions is a distribution") {
    Rng rng(3);
    std::vector<std::vector<double>> curves;
    for (int i = 0; i < 40; ++i) curves.push_back(resample(random_distribution(rng, 1 + rng.index(50))));
    CHECK(total(aggregate(curves).values) == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("early mass") {
    AttentionCurve uniform;
    uniform.values.assign(100, 0.01);
    uniform.std.assign(100, 0.0);
    CHECK(early_mass(uniform, 0.25) == doctest::Approx(0.25));

    AttentionCurve point;
    point.values.assign(100, 0.0);
    point.values[0] = 1.0;
    point.std.assign(100, 0.0);
    CHECK(early_mass(point, 0.01) == 1.0);

    // Ramp proportional to 100, 99, ..., 1: the first half holds
    // (100 + 51) * 50 / 2 = 3775 of 5050.
    AttentionCurve ramp;
    for (int k = 100; k >= 1; --k) ramp.values.push_back(k / 5050.0);
    ramp.std.assign(100, 0.0);
    CHECK(early_mass(ramp, 0.5) == doctest::Approx(3775.0 / 5050.0).epsilon(1e-12));
    CHECK(early_mass(ramp, 0.1) == doctest::Approx(955.0 / 5050.0).epsilon(1e-12));
    CHECK(early_mass(ramp, 1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(early_mass(ramp, 0.0), ArgumentError);
    CHECK_THROWS_AS(early_mass(ramp, 1.5), ArgumentError);
  }

  TEST_CASE("curve CSV") {
    const std::vector<std::vector<double>> pair = {{1.0, 0.0}, {0.0, 1.0}};
    CHECK(aggregate(pair).to_csv() == "position,mean,std\n0,0.5,0.5\n1,0.5,0.5\n");
  }
}
