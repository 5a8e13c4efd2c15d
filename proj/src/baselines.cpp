// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "probekit/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "probekit/error.hpp"
#include "probekit/probe.hpp"
#include "probekit/rng.hpp"

namespace probekit {

std::vector<double> pool_max(const HiddenStates& x) {
  if (x.length == 0) {
    throw ArgumentError("pool_max: empty sequence");
  }
  std::vector<double> out(x.dim, -std::numeric_limits<double>::infinity());
  for (std::size_t l = 0; l < x.length; ++l) {
    const auto row = x.row(l);
    for (std::size_t j = 0; j < x.dim; ++j) {
      out[j] = std::max(out[j], static_cast<double>(row[j]));
    }
  }
  return out;
}

std::vector<double> pool_mean(const HiddenStates& x) {
  if (x.length == 0) {
    throw ArgumentError("pool_mean: empty sequence");
  }
  std::vector<double> out(x.dim, 0.0);
  for (std::size_t l = 0; l < x.length; ++l) {
    const auto row = x.row(l);
    for (std::size_t j = 0; j < x.dim; ++j) {
      out[j] += static_cast<double>(row[j]);
    }
  }
  for (double& v : out) {
    v /= static_cast<double>(x.length);
  }
  return out;
}

std::array<std::size_t, 5> positional_indices(std::size_t length) {
  if (length == 0) {
    throw ArgumentError("positional_indices: length must be positive");
  }
  std::array<std::size_t, 5> out{};
  const double last = static_cast<double>(length - 1);
  for (std::size_t k = 0; k < kRelativePositions.size(); ++k) {
    out[k] = static_cast<std::size_t>(std::round(kRelativePositions[k] * last));
  }
  return out;
}

std::vector<double> LinearProbeParams::flatten() const {
  std::vector<double> flat(weights.values().begin(), weights.values().end());
  flat.insert(flat.end(), bias.begin(), bias.end());
  return flat;
}

void LinearProbeParams::unflatten(std::span<const double> flat) {
  if (flat.size() != weights.size() + bias.size()) {
    throw DimensionMismatch("LinearProbeParams::unflatten: wrong parameter count");
  }
  std::copy_n(flat.begin(), weights.size(), weights.values().begin());
  std::copy(flat.begin() + static_cast<std::ptrdiff_t>(weights.size()), flat.end(), bias.begin());
}

std::vector<double> linear_probs(const LinearProbeParams& params, std::span<const double> vector) {
  if (vector.size() != params.dim()) {
    throw DimensionMismatch("linear probe: input has " + std::to_string(vector.size()) + " features, expected " +
                            std::to_string(params.dim()));
  }
  std::vector<double> logits(params.num_classes());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    const auto w = params.weights.row(c);
    double acc = params.bias[c];
    for (std::size_t k = 0; k < vector.size(); ++k) {
      acc += w[k] * vector[k];
    }
    logits[c] = acc;
  }
  std::vector<double> probs(logits.size());
  softmax(logits, probs);
  return probs;
}

std::size_t linear_predict(const LinearProbeParams& params, std::span<const double> vector) {
  return argmax(linear_probs(params, vector));
}

namespace {

class LinearObjective final : public Objective {
 public:
  LinearObjective(std::size_t dim, std::size_t classes, std::span<const PooledExample> train_set,
                  std::span<const PooledExample> dev_set)
      : current_(dim, classes), train_(train_set), dev_(dev_set) {}

  std::size_t train_count() const override { return train_.size(); }

  double batch_loss_and_grad(std::span<const double> params, std::span<const std::size_t> batch,
                             std::span<double> grad) const override {
    current_.unflatten(params);
    const std::size_t d = current_.dim();
    const std::size_t bias_at = current_.weights.size();
    double total = 0.0;
    std::vector<double> logits(current_.num_classes());
    for (std::size_t i : batch) {
      const auto& ex = train_[i];
      total += example_loss(ex, logits);
      // logits now hold softmax probabilities
      logits[ex.label] -= 1.0;
      for (std::size_t c = 0; c < logits.size(); ++c) {
        double* g = grad.data() + c * d;
        for (std::size_t k = 0; k < d; ++k) {
          g[k] += logits[c] * ex.vector[k];
        }
        grad[bias_at + c] += logits[c];
      }
    }
    return total;
  }

  double dev_loss(std::span<const double> params, std::size_t /*epoch*/) const override {
    current_.unflatten(params);
    std::vector<double> scratch(current_.num_classes());
    double total = 0.0;
    for (const auto& ex : dev_) {
      total += example_loss(ex, scratch);
    }
    return total / static_cast<double>(dev_.size());
  }

 private:
  // Cross-entropy for one example; leaves the class probabilities in `scratch`.
  double example_loss(const PooledExample& ex, std::vector<double>& scratch) const {
    for (std::size_t c = 0; c < scratch.size(); ++c) {
      const auto w = current_.weights.row(c);
      double acc = current_.bias[c];
      for (std::size_t k = 0; k < ex.vector.size(); ++k) {
        acc += w[k] * ex.vector[k];
      }
      scratch[c] = acc;
    }
    const double loss = cross_entropy(scratch, ex.label);
    std::vector<double> logits = scratch;
    softmax(logits, scratch);
    return loss;
  }

  mutable LinearProbeParams current_;
  std::span<const PooledExample> train_;
  std::span<const PooledExample> dev_;
};

void check_examples(std::span<const PooledExample> examples, std::size_t dim, std::size_t classes,
                    const char* split) {
  for (const auto& ex : examples) {
    if (ex.vector.size() != dim) {
      throw DimensionMismatch(std::string("train_linear_probe: ") + split + " example '" + ex.segment_id +
                              "' has dim " + std::to_string(ex.vector.size()) + ", expected " +
                              std::to_string(dim));
    }
    if (ex.label >= classes) {
      throw ArgumentError(std::string("train_linear_probe: label out of range in ") + split);
    }
    if (!std::all_of(ex.vector.begin(), ex.vector.end(), [](double v) { return std::isfinite(v); })) {
      throw ValidationError(std::string("train_linear_probe: non-finite feature in ") + split);
    }
  }
}

}  // namespace

LinearTrainResult train_linear_probe(std::span<const PooledExample> train_set, std::span<const PooledExample> dev_set,
                                     const TrainConfig& config, std::size_t num_classes) {
  if (train_set.empty() || dev_set.empty()) {
    throw ArgumentError("train_linear_probe: train and dev splits must be nonempty");
  }
  const std::size_t dim = train_set.front().vector.size();
  if (dim == 0) {
    throw ArgumentError("train_linear_probe: zero-dimensional features");
  }
  check_examples(train_set, dim, num_classes, "train");
  check_examples(dev_set, dim, num_classes, "dev");

  LinearProbeParams init(dim, num_classes);
  Rng rng(config.seed);
  const double bound = std::sqrt(6.0 / static_cast<double>(dim + num_classes));
  for (double& w : init.weights.values()) {
    w = rng.uniform(-bound, bound);
  }

  LinearObjective objective(dim, num_classes, train_set, dev_set);
  TrainResult trained = train(objective, init.flatten(), config);
  init.unflatten(trained.params);
  return {std::move(init), std::move(trained.log)};
}

std::vector<PooledExample> pool_examples(std::span<const FeatureSequence> sequences, Pooling pooling) {
  std::vector<PooledExample> out;
  out.reserve(sequences.size());
  for (const auto& seq : sequences) {
    out.push_back({pooling == Pooling::Max ? pool_max(seq.states) : pool_mean(seq.states), class_index(seq.gender),
                   seq.segment_id});
  }
  return out;
}

std::vector<PooledExample> sample_position(std::span<const FeatureSequence> sequences, std::size_t slot) {
  if (slot >= kRelativePositions.size()) {
    throw ArgumentError("sample_position: slot must be below 5");
  }
  std::vector<PooledExample> out;
  out.reserve(sequences.size());
  for (const auto& seq : sequences) {
    const std::size_t l = positional_indices(seq.states.length)[slot];
    const auto row = seq.states.row(l);
    out.push_back({std::vector<double>(row.begin(), row.end()), class_index(seq.gender), seq.segment_id});
  }
  return out;
}

PositionalReport evaluate_positional(const Dataset& data, const TrainConfig& config) {
  if (data.train.empty() || data.dev.empty() || data.test.empty()) {
    throw ArgumentError("evaluate_positional: train, dev and test splits must be nonempty");
  }
  PositionalReport report;
  for (std::size_t slot = 0; slot < kRelativePositions.size(); ++slot) {
    const auto train_set = sample_position(data.train, slot);
    const auto dev_set = sample_position(data.dev, slot);
    const auto test_set = sample_position(data.test, slot);
    auto trained = train_linear_probe(train_set, dev_set, config);
    std::vector<std::size_t> preds;
    std::vector<std::size_t> labels;
    for (const auto& ex : test_set) {
      preds.push_back(linear_predict(trained.params, ex.vector));
      labels.push_back(ex.label);
    }
    report.reports[slot] = classification_report(preds, labels);
    report.params[slot] = std::move(trained.params);
    report.logs[slot] = std::move(trained.log);
    if (report.reports[slot].macro_f1 > report.reports[report.best_position].macro_f1) {
      report.best_position = slot;
    }
  }
  return report;
}

nlohmann::ordered_json PositionalReport::to_json() const {
  const std::vector<std::string> labels = {"She", "He"};
  nlohmann::ordered_json j;
  j["best_position"] = best_position;
  j["best_relative_position"] = kRelativePositions[best_position];
  auto& positions = j["positions"] = nlohmann::ordered_json::array();
  for (std::size_t slot = 0; slot < reports.size(); ++slot) {
    nlohmann::ordered_json p;
    p["slot"] = slot;
    p["relative_position"] = kRelativePositions[slot];
    p["report"] = reports[slot].to_json(labels);
    positions.push_back(std::move(p));
  }
  return j;
}

}  // namespace probekit
