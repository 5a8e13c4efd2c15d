// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "probekit/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "probekit/error.hpp"

namespace probekit {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t cols = rows.size() == 0 ? 0 : rows.begin()->size();
  Matrix m(rows.size(), cols);
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != cols) {
      throw DimensionMismatch("Matrix::from_rows: ragged rows");
    }
    std::copy(row.begin(), row.end(), m.row(r).begin());
    ++r;
  }
  return m;
}

HiddenStates HiddenStates::from_rows(std::initializer_list<std::initializer_list<float>> rows) {
  const std::size_t dim = rows.size() == 0 ? 0 : rows.begin()->size();
  HiddenStates x(rows.size(), dim);
  std::size_t l = 0;
  for (const auto& row : rows) {
    if (row.size() != dim) {
      throw DimensionMismatch("HiddenStates::from_rows: ragged rows");
    }
    std::copy(row.begin(), row.end(), x.row(l).begin());
    ++l;
  }
  return x;
}

bool HiddenStates::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](float v) { return std::isfinite(v); });
}

void softmax(std::span<const double> scores, std::span<double> out) {
  const double peak = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - peak);
    total += out[i];
  }
  for (double& v : out) {
    v /= total;
  }
}

double log_sum_exp(std::span<const double> scores) {
  const double peak = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double s : scores) {
    total += std::exp(s - peak);
  }
  return peak + std::log(total);
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
  const auto top = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  double rest = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (c != top) rest += std::exp(logits[c] - logits[top]);
  }
  // Keeps full precision when the label holds nearly all the mass.
  return (logits[top] - logits[label]) + std::log1p(rest);
}

}  // namespace probekit
