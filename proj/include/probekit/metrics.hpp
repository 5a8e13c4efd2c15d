// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "probekit/featurestore.hpp"

namespace probekit {

struct ClassificationReport {
  std::size_t num_classes = 0;
  std::size_t n = 0;
  double macro_f1 = 0.0;
  std::vector<double> recall;     // per class; 0 for a class absent from labels
  std::vector<double> precision;  // per class; 0 for a class never predicted
  std::vector<double> f1;
  std::vector<bool> in_macro;     // whether the class counted toward macro_f1
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]

  // Scores as percentages with two decimals; classes named by `labels`.
  nlohmann::ordered_json to_json(std::span<const std::string> labels) const;
};

// Macro F1 averages the per-class F1 over classes that occur in `labels`;
// classes absent from the labels are left out of the average.
ClassificationReport classification_report(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                                           std::size_t num_classes = 2);

enum class TranslationOutcome { CorrectGender, WrongGender };

// counts[probe][translation]: probe index 0 = correct, 1 = incorrect;
// translation index 0 = correct gender, 1 = wrong gender.
struct CrossTable {
  std::array<std::array<std::size_t, 2>, 2> counts{};

  std::size_t total() const;
};

struct CrossTabs {
  std::array<CrossTable, 2> by_gender;  // indexed by class_index(gender)

  std::size_t total() const { return by_gender[0].total() + by_gender[1].total(); }
  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

CrossTabs cross_tab(std::span<const bool> probe_correct, std::span<const TranslationOutcome> translation,
                    std::span<const Gender> gender);

struct RegressionSummary {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::optional<double> p_value;  // needs n >= 3
  double slope_stderr = 0.0;
  std::size_t n = 0;

  nlohmann::ordered_json to_json() const;
};

// Ordinary least squares of y on x with a two-sided t-test on the slope.
RegressionSummary linreg(std::span<const double> x, std::span<const double> y);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

}  // namespace probekit
