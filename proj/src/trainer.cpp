// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "probekit/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "probekit/error.hpp"
#include "probekit/rng.hpp"

namespace probekit {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ArgumentError("TrainConfig: batch_size must be at least 1");
  if (!(lr0 > 0.0)) throw ArgumentError("TrainConfig: lr0 must be positive");
  if (lr_patience == 0) throw ArgumentError("TrainConfig: lr_patience must be positive");
  if (!(lr_factor > 0.0 && lr_factor < 1.0)) throw ArgumentError("TrainConfig: lr_factor must lie in (0, 1)");
  if (!(es_min_delta >= 0.0)) throw ArgumentError("TrainConfig: es_min_delta must be nonnegative");
  if (es_patience == 0) throw ArgumentError("TrainConfig: es_patience must be positive");
  if (max_epochs == 0) throw ArgumentError("TrainConfig: max_epochs must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw ArgumentError("TrainConfig: Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ArgumentError("TrainConfig: adam_eps must be positive");
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["batch_size"] = batch_size;
  j["lr0"] = lr0;
  j["lr_patience"] = lr_patience;
  j["lr_factor"] = lr_factor;
  j["es_min_delta"] = es_min_delta;
  j["es_patience"] = es_patience;
  j["max_epochs"] = max_epochs;
  j["seed"] = seed;
  j["adam_beta1"] = adam_beta1;
  j["adam_beta2"] = adam_beta2;
  j["adam_eps"] = adam_eps;
  return j;
}

nlohmann::ordered_json TrainLog::to_json() const {
  nlohmann::ordered_json j;
  j["stop_reason"] = stop_reason == StopReason::EarlyStop ? "early_stop" : "max_epochs";
  j["best_epoch"] = best_epoch;
  auto& rows = j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : epochs) {
    nlohmann::ordered_json row;
    row["epoch"] = e.epoch;
    row["train_loss"] = e.train_loss;
    row["dev_loss"] = e.dev_loss;
    row["lr"] = e.lr;
    row["lr_reductions"] = e.lr_reductions;
    rows.push_back(std::move(row));
  }
  return j;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr, double beta1,
               double beta2, double eps) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw DimensionMismatch("adam_step: parameter, gradient and state sizes differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(beta1, t);
  const double correction2 = 1.0 - std::pow(beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

TrainResult train(const Objective& objective, std::vector<double> initial, const TrainConfig& config) {
  config.validate();
  const std::size_t n = objective.train_count();
  if (n == 0) {
    throw ArgumentError("train: empty train split");
  }

  std::vector<double> params = std::move(initial);
  std::vector<double> grad(params.size());
  AdamState adam(params.size());
  Rng rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.params = params;
  double best_dev = std::numeric_limits<double>::infinity();
  double plateau_best = best_dev;
  double stop_best = best_dev;
  std::size_t plateau_wait = 0;
  std::size_t stop_wait = 0;
  std::size_t reductions = 0;
  double lr = config.lr0;
  result.log.stop_reason = StopReason::MaxEpochs;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double train_total = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
      const std::size_t count = std::min(config.batch_size, n - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      const double batch_loss =
          objective.batch_loss_and_grad(params, std::span(order).subspan(start, count), grad);
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      }
      train_total += batch_loss;
      const double inv = 1.0 / static_cast<double>(count);
      for (double& g : grad) {
        g *= inv;
      }
      adam_step(params, grad, adam, lr, config.adam_beta1, config.adam_beta2, config.adam_eps);
    }

    const double dev = objective.dev_loss(params, epoch);
    if (!std::isfinite(dev)) {
      throw TrainingError("train: non-finite dev loss at epoch " + std::to_string(epoch));
    }
    result.log.epochs.push_back({epoch, train_total / static_cast<double>(n), dev, lr, reductions});

    if (dev < best_dev) {
      best_dev = dev;
      result.params = params;
      result.log.best_epoch = epoch;
    }

    if (dev < plateau_best) {
      plateau_best = dev;
      plateau_wait = 0;
    } else if (++plateau_wait >= config.lr_patience) {
      lr *= config.lr_factor;
      ++reductions;
      plateau_wait = 0;
    }

    if (dev < stop_best - config.es_min_delta) {
      stop_best = dev;
      stop_wait = 0;
    } else if (++stop_wait >= config.es_patience) {
      result.log.stop_reason = StopReason::EarlyStop;
      break;
    }
  }
  return result;
}

namespace {

class AttentionObjective final : public Objective {
 public:
  AttentionObjective(const ProbeParams& shape, std::span<const FeatureSequence> train_set,
                     std::span<const FeatureSequence> dev_set)
      : shape_(shape), train_(train_set), dev_(dev_set) {}

  std::size_t train_count() const override { return train_.size(); }

  double batch_loss_and_grad(std::span<const double> params, std::span<const std::size_t> batch,
                             std::span<double> grad) const override {
    current_.unflatten(params);
    double total = 0.0;
    for (std::size_t i : batch) {
      const auto& seq = train_[i];
      total += accumulate_loss_and_grads(current_, seq.states, class_index(seq.gender), grad);
    }
    return total;
  }

  double dev_loss(std::span<const double> params, std::size_t /*epoch*/) const override {
    current_.unflatten(params);
    double total = 0.0;
    for (const auto& seq : dev_) {
      total += loss(current_, seq.states, class_index(seq.gender));
    }
    return total / static_cast<double>(dev_.size());
  }

 private:
  ProbeParams shape_;
  mutable ProbeParams current_ = shape_;
  std::span<const FeatureSequence> train_;
  std::span<const FeatureSequence> dev_;
};

}  // namespace

ProbeTrainResult train_attention_probe(ProbeParams initial, std::span<const FeatureSequence> train_set,
                                       std::span<const FeatureSequence> dev_set, const TrainConfig& config) {
  if (train_set.empty() || dev_set.empty()) {
    throw ArgumentError("train_attention_probe: train and dev splits must be nonempty");
  }
  initial.validate();
  for (const auto* split : {&train_set, &dev_set}) {
    for (const auto& seq : *split) {
      if (seq.states.dim != initial.dim()) {
        throw DimensionMismatch("train_attention_probe: '" + seq.segment_id + "' has dim " +
                                std::to_string(seq.states.dim) + ", probe expects " +
                                std::to_string(initial.dim()));
      }
    }
  }
  AttentionObjective objective(initial, train_set, dev_set);
  TrainResult trained = train(objective, initial.flatten(), config);
  initial.unflatten(trained.params);
  return {std::move(initial), std::move(trained.log)};
}

ProbeTrainResult train_attention_probe(std::span<const FeatureSequence> train_set,
                                       std::span<const FeatureSequence> dev_set, const TrainConfig& config) {
  if (train_set.empty()) {
    throw ArgumentError("train_attention_probe: empty train split");
  }
  return train_attention_probe(init_params(train_set.front().states.dim, config.seed), train_set, dev_set, config);
}

}  // namespace probekit
