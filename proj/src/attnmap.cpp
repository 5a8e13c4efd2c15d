// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "probekit/attnmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "probekit/error.hpp"
#include "probekit/io.hpp"

namespace probekit {

std::vector<double> resample(std::span<const double> weights, std::size_t length) {
  if (length < 2) {
    throw ArgumentError("resample: target length must be at least 2");
  }
  if (weights.empty()) {
    throw ArgumentError("resample: empty attention sequence");
  }
  double mass = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ValidationError("resample: attention weights must be finite and nonnegative");
    }
    mass += w;
  }
  if (std::abs(mass - 1.0) > 1e-4) {
    throw ValidationError("resample: attention weights sum to " + format_double(mass) + ", not 1");
  }

  std::vector<double> out(length);
  const std::size_t source = weights.size();
  if (source == 1) {
    out.assign(length, weights[0]);
  } else {
    const double last = static_cast<double>(source - 1);
    for (std::size_t t = 0; t < length; ++t) {
      const double pos = static_cast<double>(t) / static_cast<double>(length - 1) * last;
      const auto left = std::min(static_cast<std::size_t>(std::floor(pos)), source - 2);
      const double frac = pos - static_cast<double>(left);
      out[t] = (1.0 - frac) * weights[left] + frac * weights[left + 1];
    }
  }
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (total > 0.0) {
    for (double& v : out) {
      v /= total;
    }
  } else {
    out.assign(length, 1.0 / static_cast<double>(length));
  }
  return out;
}

AttentionCurve aggregate(std::span<const std::vector<double>> curves) {
  if (curves.empty()) {
    throw ArgumentError("aggregate: no curves");
  }
  const std::size_t length = curves.front().size();
  AttentionCurve out;
  out.values.assign(length, 0.0);
  out.std.assign(length, 0.0);
  out.count = curves.size();
  for (const auto& c : curves) {
    if (c.size() != length) {
      throw DimensionMismatch("aggregate: curves have different lengths");
    }
    for (std::size_t t = 0; t < length; ++t) {
      out.values[t] += c[t];
    }
  }
  const double n = static_cast<double>(curves.size());
  for (double& v : out.values) {
    v /= n;
  }
  for (const auto& c : curves) {
    for (std::size_t t = 0; t < length; ++t) {
      const double dev = c[t] - out.values[t];
      out.std[t] += dev * dev;
    }
  }
  for (double& s : out.std) {
    s = std::sqrt(s / n);
  }
  return out;
}

double early_mass(const AttentionCurve& curve, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ArgumentError("early_mass: fraction must lie in (0, 1]");
  }
  if (curve.values.empty()) {
    throw ArgumentError("early_mass: empty curve");
  }
  const double length = static_cast<double>(curve.length());
  // Guard against 0.1 * 100 landing a hair above 10.
  auto count = static_cast<std::size_t>(std::ceil(fraction * length - 1e-9));
  count = std::clamp<std::size_t>(count, 1, curve.length());
  return std::accumulate(curve.values.begin(), curve.values.begin() + static_cast<std::ptrdiff_t>(count), 0.0);
}

std::string AttentionCurve::to_csv() const {
  std::ostringstream out;
  out << "position,mean,std\n";
  for (std::size_t t = 0; t < values.size(); ++t) {
    out << t << ',' << format_double(values[t]) << ',' << format_double(std[t]) << '\n';
  }
  return out.str();
}

}  // namespace probekit
