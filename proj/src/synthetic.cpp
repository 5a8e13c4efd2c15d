// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "probekit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "probekit/error.hpp"
#include "probekit/rng.hpp"

namespace probekit {

namespace {

FeatureSequence make_sequence(const SyntheticSpec& spec, Rng& rng, Gender gender, std::string segment_id,
                              std::string speaker_id) {
  const std::size_t span = spec.max_length - spec.min_length + 1;
  const std::size_t length = spec.min_length + rng.index(span);
  auto planted = static_cast<std::size_t>(std::ceil(spec.signal_fraction * static_cast<double>(length)));
  planted = std::clamp<std::size_t>(planted, 1, length);
  const std::size_t first = spec.placement == SyntheticSpec::Placement::Start ? 0 : length - planted;
  const double sign = gender == Gender::She ? 1.0 : -1.0;

  FeatureSequence seq{std::move(segment_id), std::move(speaker_id), gender, HiddenStates(length, spec.dim)};
  for (std::size_t l = 0; l < length; ++l) {
    auto row = seq.states.row(l);
    const bool in_block = l >= first && l < first + planted;
    for (std::size_t j = 0; j < spec.dim; ++j) {
      double v = 0.0;
      if (in_block && j == 0) {
        v = sign * spec.signal + spec.planted_noise * rng.normal();
      } else if (in_block && j == 1) {
        v = spec.marker + spec.planted_noise * rng.normal();
      } else if (j == 1) {
        v = spec.marker_background_noise * rng.normal();
      } else {
        v = spec.background_noise * rng.normal();
      }
      row[j] = static_cast<float>(v);
    }
  }
  return seq;
}

std::vector<FeatureSequence> make_split(const SyntheticSpec& spec, Rng& rng, std::string_view split,
                                        std::size_t count) {
  std::vector<FeatureSequence> out;
  out.reserve(count);
  const std::size_t per_speaker = std::max<std::size_t>(1, spec.segments_per_speaker);
  for (std::size_t i = 0; i < count; ++i) {
    // Alternate genders so every split is balanced; speakers never mix.
    const Gender gender = i % 2 == 0 ? Gender::She : Gender::He;
    const std::size_t speaker = (i / 2) / per_speaker * 2 + (i % 2);
    out.push_back(make_sequence(spec, rng, gender, std::string(split) + "-" + std::to_string(i),
                                std::string(split) + "-spk" + std::to_string(speaker)));
  }
  return out;
}

}  // namespace

Dataset make_synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.dim < 2) {
    throw ArgumentError("make_synthetic_dataset: need at least two features");
  }
  if (spec.min_length == 0 || spec.max_length < spec.min_length) {
    throw ArgumentError("make_synthetic_dataset: invalid length range");
  }
  Rng rng(spec.seed);
  Dataset data;
  data.train = make_split(spec, rng, "train", spec.train_count);
  data.dev = make_split(spec, rng, "dev", spec.dev_count);
  data.test = make_split(spec, rng, "test", spec.test_count);
  return data;
}

LabelledPool flatten_dataset(const Dataset& data) {
  LabelledPool pool;
  for (Split split : {Split::Train, Split::Dev, Split::Test}) {
    for (const auto& seq : data.split(split)) {
      pool.sequences.push_back(seq);
      pool.splits.push_back(split);
    }
  }
  return pool;
}

}  // namespace probekit
