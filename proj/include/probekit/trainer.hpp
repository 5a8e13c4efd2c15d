// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <span>
#include <vector>

#include "probekit/featurestore.hpp"
#include "probekit/probe.hpp"

namespace probekit {

struct TrainConfig {
  std::size_t batch_size = 32;
  double lr0 = 1e-4;
  std::size_t lr_patience = 3;
  double lr_factor = 0.5;
  double es_min_delta = 1e-5;
  std::size_t es_patience = 20;
  std::size_t max_epochs = 500;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean over the epoch's examples
  double dev_loss = 0.0;
  double lr = 0.0;          // rate used during this epoch
  std::size_t lr_reductions = 0;  // reductions applied before this epoch
};

enum class StopReason { EarlyStop, MaxEpochs };

struct TrainLog {
  std::vector<EpochRecord> epochs;
  StopReason stop_reason = StopReason::MaxEpochs;
  std::size_t best_epoch = 0;

  nlohmann::ordered_json to_json() const;
};

// What the training loop needs from a model: minibatch gradients over the
// train split and a full dev-split loss, both as functions of a flat
// parameter vector.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t train_count() const = 0;

  // Adds the gradient of the summed loss over `batch` into `grad` and
  // returns that summed loss.
  virtual double batch_loss_and_grad(std::span<const double> params, std::span<const std::size_t> batch,
                                     std::span<double> grad) const = 0;

  // Mean loss over the dev split after `epoch`.
  virtual double dev_loss(std::span<const double> params, std::size_t epoch) const = 0;
};

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t size = 0) : first_moment(size, 0.0), second_moment(size, 0.0) {}
};

// One bias-corrected Adam update of `params` in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr, double beta1,
               double beta2, double eps);

struct TrainResult {
  std::vector<double> params;  // from the epoch with the lowest dev loss
  TrainLog log;
};

// Mini-batch Adam with plateau LR reduction and min-delta early stopping.
//
// After every epoch the dev loss is compared against the best seen so far:
//  - the LR is multiplied by lr_factor once it has failed to strictly
//    decrease for lr_patience consecutive epochs (the count restarts on a
//    decrease and after each reduction);
//  - training stops once it has failed to improve by at least es_min_delta
//    for es_patience consecutive epochs.
TrainResult train(const Objective& objective, std::vector<double> initial, const TrainConfig& config);

struct ProbeTrainResult {
  ProbeParams params;
  TrainLog log;
};

// Trains the attention probe on gender labels, starting from
// init_params(d, config.seed).
ProbeTrainResult train_attention_probe(std::span<const FeatureSequence> train_set,
                                       std::span<const FeatureSequence> dev_set, const TrainConfig& config);

ProbeTrainResult train_attention_probe(ProbeParams initial, std::span<const FeatureSequence> train_set,
                                       std::span<const FeatureSequence> dev_set, const TrainConfig& config);

}  // namespace probekit
