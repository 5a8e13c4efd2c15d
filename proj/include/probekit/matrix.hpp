// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace probekit {

// Dense row-major matrix of doubles used for model parameters.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// L x d block of 32-bit hidden states, one row per position.
struct HiddenStates {
  std::size_t length = 0;
  std::size_t dim = 0;
  std::vector<float> values;

  HiddenStates() = default;
  HiddenStates(std::size_t length_, std::size_t dim_, float fill = 0.0F)
      : length(length_), dim(dim_), values(length_ * dim_, fill) {}

  static HiddenStates from_rows(std::initializer_list<std::initializer_list<float>> rows);

  std::span<float> row(std::size_t l) { return {values.data() + l * dim, dim}; }
  std::span<const float> row(std::size_t l) const { return {values.data() + l * dim, dim}; }

  bool all_finite() const;

  friend bool operator==(const HiddenStates&, const HiddenStates&) = default;
};

// Numerically stable softmax (max-subtracted) of `scores` into `out`.
void softmax(std::span<const double> scores, std::span<double> out);

// log(sum(exp(scores))) with max subtraction.
double log_sum_exp(std::span<const double> scores);

// -log softmax(logits)[label].
double cross_entropy(std::span<const double> logits, std::size_t label);

}  // namespace probekit
