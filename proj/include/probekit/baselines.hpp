// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "probekit/featurestore.hpp"
#include "probekit/matrix.hpp"
#include "probekit/metrics.hpp"
#include "probekit/trainer.hpp"

namespace probekit {

std::vector<double> pool_max(const HiddenStates& x);
std::vector<double> pool_mean(const HiddenStates& x);

inline constexpr std::array<double, 5> kRelativePositions = {0.0, 0.25, 0.5, 0.75, 1.0};

// round(p * (L - 1)) for each relative position, rounding halves away from zero.
std::array<std::size_t, 5> positional_indices(std::size_t length);

struct PooledExample {
  std::vector<double> vector;
  std::size_t label = 0;
  std::string segment_id;
};

struct LinearProbeParams {
  Matrix weights;             // C x d
  std::vector<double> bias;   // C

  LinearProbeParams() = default;
  LinearProbeParams(std::size_t dim, std::size_t num_classes) : weights(num_classes, dim), bias(num_classes, 0.0) {}

  std::size_t dim() const { return weights.cols(); }
  std::size_t num_classes() const { return bias.size(); }

  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
};

std::vector<double> linear_probs(const LinearProbeParams& params, std::span<const double> vector);
std::size_t linear_predict(const LinearProbeParams& params, std::span<const double> vector);

struct LinearTrainResult {
  LinearProbeParams params;
  TrainLog log;
};

// Softmax regression trained with the same loop as the attention probe,
// starting from Xavier-uniform weights seeded by config.seed.
LinearTrainResult train_linear_probe(std::span<const PooledExample> train_set, std::span<const PooledExample> dev_set,
                                     const TrainConfig& config, std::size_t num_classes = 2);

enum class Pooling { Max, Mean };

std::vector<PooledExample> pool_examples(std::span<const FeatureSequence> sequences, Pooling pooling);

// The state at relative position kRelativePositions[slot] of each sequence.
std::vector<PooledExample> sample_position(std::span<const FeatureSequence> sequences, std::size_t slot);

struct PositionalReport {
  std::array<ClassificationReport, 5> reports;
  std::array<LinearProbeParams, 5> params;
  std::array<TrainLog, 5> logs;
  std::size_t best_position = 0;

  double macro_f1(std::size_t slot) const { return reports[slot].macro_f1; }
  nlohmann::ordered_json to_json() const;
};

// Trains one linear probe per relative position on the train/dev splits and
// scores each on test; the best position is the highest test macro F1
// (earliest position on ties).
PositionalReport evaluate_positional(const Dataset& data, const TrainConfig& config);

}  // namespace probekit
