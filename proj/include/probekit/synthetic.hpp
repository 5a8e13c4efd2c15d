// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "probekit/featurestore.hpp"

namespace probekit {

// Generator for labelled hidden-state sequences with a class signal planted
// in a contiguous block of positions.
//
// Planted positions carry +signal (She) or -signal (He) on feature 0 and a
// marker value on feature 1, both with small noise. Every other entry is
// background noise; feature 1 has its own, quieter background so the marker
// stands out.
struct SyntheticSpec {
  enum class Placement { Start, End };

  std::size_t dim = 16;
  std::size_t min_length = 20;
  std::size_t max_length = 200;
  std::size_t train_count = 2000;
  std::size_t dev_count = 400;
  std::size_t test_count = 400;
  std::size_t segments_per_speaker = 4;
  // Planted block covers ceil(fraction * L) positions (at least one).
  double signal_fraction = 0.1;
  Placement placement = Placement::Start;
  double signal = 2.0;
  double marker = 8.0;
  double planted_noise = 0.3;
  double background_noise = 2.0;
  double marker_background_noise = 0.5;
  std::uint64_t seed = 0;
};

// Balanced splits with speaker-disjoint ids ("<split>-spk<k>"); each speaker
// has one gender.
Dataset make_synthetic_dataset(const SyntheticSpec& spec);

struct LabelledPool {
  std::vector<FeatureSequence> sequences;
  std::vector<Split> splits;  // parallel to sequences
};

// The same data flattened into one pack-ready list with split labels.
LabelledPool flatten_dataset(const Dataset& data);

}  // namespace probekit
