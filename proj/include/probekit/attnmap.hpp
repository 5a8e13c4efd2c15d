// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace probekit {

inline constexpr std::size_t kDefaultCurveLength = 100;

struct AttentionCurve {
  std::vector<double> values;  // pointwise mean
  std::vector<double> std;     // pointwise population standard deviation
  std::size_t count = 0;

  std::size_t length() const { return values.size(); }

  // "position,mean,std" rows, one per resampled position.
  std::string to_csv() const;
};

// Linearly interpolates attention weights from their relative positions
// l/(L-1) onto `length` evenly spaced points in [0, 1], then renormalizes
// to unit mass. A single weight is broadcast.
std::vector<double> resample(std::span<const double> weights, std::size_t length = kDefaultCurveLength);

AttentionCurve aggregate(std::span<const std::vector<double>> curves);

// Mass of the mean curve over its first ceil(fraction * T) positions.
double early_mass(const AttentionCurve& curve, double fraction);

}  // namespace probekit
