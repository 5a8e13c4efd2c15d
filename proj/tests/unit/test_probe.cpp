// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "probekit/error.hpp"
#include "probekit/probe.hpp"

using namespace probekit;
using probekit::testing::random_states;

namespace {

// The d=1, L=2 instance with a hand-computed forward pass.
ProbeParams scalar_params() {
  ProbeParams p(1, 2);
  p.key_proj(0, 0) = 1.0;
  p.value_proj(0, 0) = 1.0;
  p.query[0] = 1.0;
  p.classifier_weights(0, 0) = 1.0;
  p.classifier_weights(1, 0) = -1.0;
  return p;
}

HiddenStates scalar_input() { return HiddenStates::from_rows({{1.0F}, {3.0F}}); }

ProbeParams random_params(Rng& rng, std::size_t dim, double scale = 1.0) {
  ProbeParams p(dim, 2);
  auto flat = p.flatten();
  for (double& v : flat) v = scale * rng.normal();
  p.unflatten(flat);
  return p;
}

HiddenStates duplicate_rows(const HiddenStates& x) {
  HiddenStates out(2 * x.length, x.dim);
  for (std::size_t l = 0; l < x.length; ++l) {
    for (std::size_t copy = 0; copy < 2; ++copy) {
      std::copy(x.row(l).begin(), x.row(l).end(), out.row(2 * l + copy).begin());
    }
  }
  return out;
}

// Largest relative error of analytic against central-difference gradients.
double gradient_error(const ProbeParams& params, const HiddenStates& x, std::size_t label) {
  const auto analytic = loss_and_grads(params, x, label).grads.flatten();
  auto flat = params.flatten();
  ProbeParams probe = params;
  constexpr double kStep = 1e-4;
  double worst = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double saved = flat[i];
    flat[i] = saved + kStep;
    probe.unflatten(flat);
    const double up = loss(probe, x, label);
    flat[i] = saved - kStep;
    probe.unflatten(flat);
    const double down = loss(probe, x, label);
    flat[i] = saved;
    const double numeric = (up - down) / (2 * kStep);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
  }
  return worst;
}

}  // namespace

TEST_SUITE("probe") {
  TEST_CASE("init_params is deterministic and bounded") {
    CHECK(init_params(4, 7) == init_params(4, 7));
    CHECK_FALSE(init_params(4, 7) == init_params(4, 8));
    const auto p = init_params(4, 7);
    const double bound = std::sqrt(6.0 / (4 + 2));
    for (double w : p.classifier_weights.values()) CHECK(std::abs(w) <= bound);
    for (double w : p.key_proj.values()) CHECK(std::abs(w) <= std::sqrt(6.0 / 8));
    for (double b : p.classifier_bias) CHECK(b == 0.0);
    CHECK_THROWS_AS(init_params(0, 1), ArgumentError);
  }

  TEST_CASE("query entries have standard deviation near 1/sqrt(d)") {
    constexpr std::size_t kDim = 16;
    double sum = 0.0;
    double sq = 0.0;
    std::size_t n = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      for (double v : init_params(kDim, seed).query) {
        sum += v;
        sq += v * v;
        ++n;
      }
    }
    const double mean = sum / static_cast<double>(n);
    const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
    CHECK(sd >= 0.5 / std::sqrt(16.0));
    CHECK(sd <= 2.0 / std::sqrt(16.0));
  }

  TEST_CASE("hand-computed scalar forward pass") {
    const auto out = forward(scalar_params(), scalar_input());
    CHECK(std::abs(out.attn[0] - 0.11920) < 1e-4);
    CHECK(std::abs(out.attn[1] - 0.88080) < 1e-4);
    CHECK(std::abs(out.pooled[0] - 2.76159) < 1e-4);
    CHECK(std::abs(out.probs[0] - 0.99602) < 1e-4);
    CHECK(std::abs(out.probs[1] - 0.00398) < 1e-4);
    CHECK(predict(scalar_params(), scalar_input()) == 0);
  }

  TEST_CASE("zero query attends uniformly") {
    Rng rng(3);
    auto p = random_params(rng, 3);
    std::fill(p.query.begin(), p.query.end(), 0.0);
    const auto x = random_states(rng, 5, 3);
    const auto out = forward(p, x);
    for (double a : out.attn) CHECK(a == doctest::Approx(0.2));
    for (std::size_t k = 0; k < 3; ++k) {
      double mean_v = 0.0;
      for (std::size_t l = 0; l < 5; ++l) {
        for (std::size_t j = 0; j < 3; ++j) mean_v += x.row(l)[j] * p.value_proj(j, k) / 5.0;
      }
      CHECK(out.pooled[k] == doctest::Approx(mean_v));
    }
    p.classifier_weights = Matrix(2, 3);
    std::fill(p.classifier_bias.begin(), p.classifier_bias.end(), 0.0);
    const auto tied = forward(p, x);
    CHECK(tied.probs[0] == 0.5);
    CHECK(tied.probs[1] == 0.5);
    CHECK(predict(p, x) == 0);
  }

  TEST_CASE("zero classifier gives ln 2 loss and no attention gradient") {
    Rng rng(4);
    auto p = random_params(rng, 3);
    std::fill(p.query.begin(), p.query.end(), 0.0);
    p.classifier_weights = Matrix(2, 3);
    std::fill(p.classifier_bias.begin(), p.classifier_bias.end(), 0.0);
    const auto x = random_states(rng, 4, 3);
    for (std::size_t label : {0U, 1U}) {
      const auto r = loss_and_grads(p, x, label);
      CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
      for (double g : r.grads.key_proj.values()) CHECK(g == 0.0);
      for (double g : r.grads.value_proj.values()) CHECK(g == 0.0);
      for (double g : r.grads.query) CHECK(g == 0.0);
    }
  }

  TEST_CASE("finite-difference check on a d=3, L=4 instance") {
    Rng rng(11);
    const auto p = random_params(rng, 3);
    const auto x = random_states(rng, 4, 3);
    CHECK(gradient_error(p, x, 0) < 1e-3);
    CHECK(gradient_error(p, x, 1) < 1e-3);
  }

  TEST_CASE("finite-difference check over random shapes") {
    Rng rng(12);
    for (int draw = 0; draw < 100; ++draw) {
      const std::size_t dim = 1 + rng.index(8);
      const std::size_t length = 1 + rng.index(16);
      const auto p = random_params(rng, dim, 0.7);
      const auto x = random_states(rng, length, dim);
      const std::size_t label = rng.index(2);
      const double err = gradient_error(p, x, label);
      CHECK_MESSAGE(err < 1e-3, "draw " << draw << " d=" << dim << " L=" << length);
    }
  }

  TEST_CASE("flat accumulation matches structured gradients") {
    Rng rng(13);
    const auto p = random_params(rng, 4);
    const auto x = random_states(rng, 6, 4);
    std::vector<double> flat(p.parameter_count(), 1.0);
    const double l = accumulate_loss_and_grads(p, x, 1, flat);
    const auto ref = loss_and_grads(p, x, 1);
    CHECK(l == ref.loss);
    const auto expected = ref.grads.flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) CHECK(flat[i] == doctest::Approx(expected[i] + 1.0));
  }

  TEST_CASE("distributions sum to one and are nonnegative") {
    Rng rng(14);
    for (int draw = 0; draw < 200; ++draw) {
      const std::size_t dim = 1 + rng.index(8);
      const auto p = random_params(rng, dim, 3.0);
      const auto out = forward(p, random_states(rng, 1 + rng.index(30), dim, 5.0));
      CHECK(std::accumulate(out.attn.begin(), out.attn.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(std::accumulate(out.probs.begin(), out.probs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
      for (double a : out.attn) CHECK(a >= 0.0);
      for (double q : out.probs) CHECK(q >= 0.0);
    }
  }

  TEST_CASE("row permutation permutes attention and keeps probabilities") {
    Rng rng(15);
    for (int draw = 0; draw < 20; ++draw) {
      const auto p = random_params(rng, 3);
      const auto x = random_states(rng, 7, 3);
      std::vector<std::size_t> order(7);
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(std::span<std::size_t>(order));
      HiddenStates permuted(7, 3);
      for (std::size_t l = 0; l < 7; ++l) {
        std::copy(x.row(order[l]).begin(), x.row(order[l]).end(), permuted.row(l).begin());
      }
      const auto a = forward(p, x);
      const auto b = forward(p, permuted);
      for (std::size_t l = 0; l < 7; ++l) CHECK(b.attn[l] == doctest::Approx(a.attn[order[l]]).epsilon(1e-12));
      CHECK(b.probs[0] == doctest::Approx(a.probs[0]).epsilon(1e-12));
    }
  }

  TEST_CASE("duplicating rows leaves the loss unchanged") {
    Rng rng(16);
    const auto p = random_params(rng, 3);
    const auto x = random_states(rng, 5, 3);
    CHECK(loss(p, duplicate_rows(x), 1) == doctest::Approx(loss(p, x, 1)).epsilon(1e-12));
  }

  TEST_CASE("softmax is shift invariant") {
    const std::vector<double> scores = {0.3, -1.2, 2.5, 0.0};
    std::vector<double> shifted(scores);
    for (double& s : shifted) s += 123.456;
    std::vector<double> a(4);
    std::vector<double> b(4);
    softmax(scores, a);
    softmax(shifted, b);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    const std::vector<double> huge = {1000.0, 1000.0};
    CHECK(log_sum_exp(huge) == doctest::Approx(1000.0 + std::log(2.0)));
  }

  TEST_CASE("cross entropy keeps precision for confident logits") {
    // -log(1 / (1 + e^-20)) = log1p(e^-20), about 2.06e-9.
    const std::vector<double> logits = {18.0, -2.0};
    CHECK(cross_entropy(logits, 0) == doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-14));
    CHECK(cross_entropy(logits, 1) == doctest::Approx(20.0 + std::log1p(std::exp(-20.0))).epsilon(1e-14));
    const std::vector<double> even = {0.7, 0.7};
    CHECK(cross_entropy(even, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }

  TEST_CASE("flipping classifier rows swaps the prediction") {
    Rng rng(17);
    for (int draw = 0; draw < 20; ++draw) {
      auto p = random_params(rng, 3);
      std::fill(p.classifier_bias.begin(), p.classifier_bias.end(), 0.0);
      const auto x = random_states(rng, 4, 3);
      const auto before = forward(p, x);
      if (before.probs[0] == before.probs[1]) continue;
      for (double& w : p.classifier_weights.values()) w = -w;
      CHECK(predict(p, x) != argmax(before.probs));
    }
  }

  TEST_CASE("forward rejects bad input") {
    const auto p = scalar_params();
    CHECK_THROWS_AS(forward(p, HiddenStates(2, 2)), DimensionMismatch);
    CHECK_THROWS_AS(forward(p, HiddenStates(0, 1)), DimensionMismatch);
    auto x = scalar_input();
    x.values[1] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(forward(p, x), ValidationError);
    CHECK_THROWS_AS(loss_and_grads(p, scalar_input(), 2), ArgumentError);
  }

  TEST_CASE("flatten order and round trip") {
    Rng rng(18);
    const auto p = random_params(rng, 3);
    const auto flat = p.flatten();
    CHECK(flat.size() == 3 * 3 + 3 * 3 + 3 + 2 * 3 + 2);
    CHECK(flat[0] == p.key_proj(0, 0));
    CHECK(flat[9] == p.value_proj(0, 0));
    CHECK(flat[18] == p.query[0]);
    CHECK(flat[21] == p.classifier_weights(0, 0));
    CHECK(flat[27] == p.classifier_bias[0]);
    ProbeParams q(3, 2);
    q.unflatten(flat);
    CHECK(q == p);
    CHECK_THROWS_AS(q.unflatten(std::vector<double>(5)), DimensionMismatch);
  }
}
