// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "probekit/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "probekit/error.hpp"
#include "probekit/io.hpp"

namespace probekit {

ClassificationReport classification_report(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                                           std::size_t num_classes) {
  if (preds.size() != labels.size()) {
    throw DimensionMismatch("classification_report: " + std::to_string(preds.size()) + " predictions for " +
                            std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) {
    throw ArgumentError("classification_report: no examples");
  }
  ClassificationReport r;
  r.num_classes = num_classes;
  r.n = labels.size();
  r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes || preds[i] >= num_classes) {
      throw ArgumentError("classification_report: class index out of range");
    }
    ++r.confusion[labels[i]][preds[i]];
  }

  r.recall.assign(num_classes, 0.0);
  r.precision.assign(num_classes, 0.0);
  r.f1.assign(num_classes, 0.0);
  r.in_macro.assign(num_classes, false);
  double f1_sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double tp = static_cast<double>(r.confusion[c][c]);
    std::size_t actual = 0;
    std::size_t predicted = 0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      actual += r.confusion[c][k];
      predicted += r.confusion[k][c];
    }
    if (actual > 0) r.recall[c] = tp / static_cast<double>(actual);
    if (predicted > 0) r.precision[c] = tp / static_cast<double>(predicted);
    const double denom = r.precision[c] + r.recall[c];
    r.f1[c] = denom > 0.0 ? 2.0 * r.precision[c] * r.recall[c] / denom : 0.0;
    if (actual > 0) {
      r.in_macro[c] = true;
      f1_sum += r.f1[c];
      ++counted;
    }
  }
  r.macro_f1 = f1_sum / static_cast<double>(counted);
  return r;
}

nlohmann::ordered_json ClassificationReport::to_json(std::span<const std::string> labels) const {
  auto name = [&](std::size_t c) { return c < labels.size() ? labels[c] : std::to_string(c); };
  nlohmann::ordered_json j;
  j["n"] = n;
  j["macro_f1"] = round2(100.0 * macro_f1);
  nlohmann::ordered_json recall_j, precision_j, f1_j;
  for (std::size_t c = 0; c < num_classes; ++c) {
    recall_j[name(c)] = round2(100.0 * recall[c]);
    precision_j[name(c)] = round2(100.0 * precision[c]);
    f1_j[name(c)] = round2(100.0 * f1[c]);
  }
  j["recall"] = recall_j;
  j["precision"] = precision_j;
  j["f1"] = f1_j;
  nlohmann::ordered_json excluded = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (!in_macro[c]) excluded.push_back(name(c));
  }
  j["excluded_from_macro"] = excluded;
  j["confusion"] = confusion;
  return j;
}

std::size_t CrossTable::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

CrossTabs cross_tab(std::span<const bool> probe_correct, std::span<const TranslationOutcome> translation,
                    std::span<const Gender> gender) {
  if (probe_correct.size() != translation.size() || translation.size() != gender.size()) {
    throw DimensionMismatch("cross_tab: input lengths differ");
  }
  CrossTabs tabs;
  for (std::size_t i = 0; i < gender.size(); ++i) {
    const std::size_t probe = probe_correct[i] ? 0 : 1;
    const std::size_t outcome = translation[i] == TranslationOutcome::CorrectGender ? 0 : 1;
    ++tabs.by_gender[class_index(gender[i])].counts[probe][outcome];
  }
  return tabs;
}

nlohmann::ordered_json CrossTabs::to_json() const {
  nlohmann::ordered_json j;
  for (Gender g : {Gender::She, Gender::He}) {
    const auto& t = by_gender[class_index(g)];
    nlohmann::ordered_json table;
    table["probe_correct"] = {{"translation_correct", t.counts[0][0]}, {"translation_wrong", t.counts[0][1]}};
    table["probe_incorrect"] = {{"translation_correct", t.counts[1][0]}, {"translation_wrong", t.counts[1][1]}};
    j[std::string(to_string(g))] = table;
  }
  j["total"] = total();
  return j;
}

std::string CrossTabs::to_csv() const {
  std::ostringstream out;
  out << "gender,probe,translation_correct,translation_wrong\n";
  for (Gender g : {Gender::She, Gender::He}) {
    const auto& t = by_gender[class_index(g)];
    out << to_string(g) << ",correct," << t.counts[0][0] << ',' << t.counts[0][1] << '\n';
    out << to_string(g) << ",incorrect," << t.counts[1][0] << ',' << t.counts[1][1] << '\n';
  }
  return out.str();
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return h;
    }
  }
  throw Error("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) {
    throw ArgumentError("incomplete_beta: a and b must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ArgumentError("incomplete_beta: x must lie in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) {
    throw ArgumentError("student_t_cdf: df must be positive");
  }
  if (std::isinf(t)) {
    return t > 0 ? 1.0 : 0.0;
  }
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0 ? 1.0 - tail : tail;
}

RegressionSummary linreg(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionMismatch("linreg: x and y lengths differ");
  }
  const std::size_t n = x.size();
  if (n < 2) {
    throw ArgumentError("linreg: need at least two points");
  }
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) {
    throw ArgumentError("linreg: x has zero variance");
  }

  RegressionSummary s;
  s.n = n;
  s.slope = sxy / sxx;
  s.intercept = mean_y - s.slope * mean_x;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (s.intercept + s.slope * x[i]);
    ss_res += r * r;
  }
  // Constant y: the fitted slope is exactly zero and explains nothing.
  s.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 0.0;

  if (n >= 3) {
    const double df = static_cast<double>(n - 2);
    s.slope_stderr = std::sqrt(ss_res / df / sxx);
    if (syy == 0.0) {
      s.p_value = 1.0;
    } else if (s.slope_stderr == 0.0) {
      s.p_value = 0.0;
    } else {
      const double t = s.slope / s.slope_stderr;
      s.p_value = incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    }
  }
  return s;
}

nlohmann::ordered_json RegressionSummary::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["slope"] = slope;
  j["intercept"] = intercept;
  j["r_squared"] = r_squared;
  j["slope_stderr"] = slope_stderr;
  j["p_value"] = p_value ? nlohmann::ordered_json(*p_value) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace probekit
