// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "probekit/matrix.hpp"

namespace probekit {

// Parameters of the attention-pooling probe. A single learnable query attends
// over key projections of the hidden states; the attention-weighted value
// projection is classified by one linear layer.
struct ProbeParams {
  Matrix key_proj;                  // d x d
  Matrix value_proj;                // d x d
  std::vector<double> query;        // d
  Matrix classifier_weights;        // C x d
  std::vector<double> classifier_bias;  // C

  ProbeParams() = default;
  // Zero-initialized parameters of the given shape.
  ProbeParams(std::size_t dim, std::size_t num_classes);

  std::size_t dim() const { return query.size(); }
  std::size_t num_classes() const { return classifier_bias.size(); }

  // Total scalar count; flattening order is key_proj, value_proj, query,
  // classifier_weights, classifier_bias (row-major), the checkpoint order.
  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);

  // Throws DimensionMismatch / ValidationError when shapes disagree or an
  // entry is non-finite.
  void validate() const;

  friend bool operator==(const ProbeParams&, const ProbeParams&) = default;
};

struct ProbeOutput {
  std::vector<double> probs;   // C
  std::vector<double> attn;    // L
  std::vector<double> pooled;  // d
};

// Xavier-uniform key/value/classifier weights, query ~ N(0, 1/d), zero bias.
ProbeParams init_params(std::size_t dim, std::uint64_t seed, std::size_t num_classes = 2);

ProbeOutput forward(const ProbeParams& params, const HiddenStates& x);

struct LossAndGrads {
  double loss = 0.0;
  ProbeParams grads;
};

// Cross-entropy of the true class with exact gradients for every parameter.
LossAndGrads loss_and_grads(const ProbeParams& params, const HiddenStates& x, std::size_t label);

// Same computation, accumulating the gradient into a flat buffer laid out as
// ProbeParams::flatten(). Returns the loss.
double accumulate_loss_and_grads(const ProbeParams& params, const HiddenStates& x, std::size_t label,
                                 std::span<double> flat_grad);

double loss(const ProbeParams& params, const HiddenStates& x, std::size_t label);

// Argmax of the class probabilities; ties go to the lower index.
std::size_t predict(const ProbeParams& params, const HiddenStates& x);

std::size_t argmax(std::span<const double> values);

}  // namespace probekit
