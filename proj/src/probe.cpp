// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "probekit/probe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "probekit/error.hpp"
#include "probekit/rng.hpp"

namespace probekit {

namespace {

bool finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void check_input(const ProbeParams& params, const HiddenStates& x) {
  if (x.length == 0) {
    throw DimensionMismatch("probe: empty state sequence");
  }
  if (x.dim != params.dim() || x.values.size() != x.length * x.dim) {
    throw DimensionMismatch("probe: input has " + std::to_string(x.dim) + " features, probe expects " +
                            std::to_string(params.dim()));
  }
  if (!x.all_finite()) {
    throw ValidationError("probe: non-finite input value");
  }
}

// Intermediates of one forward pass kept for backpropagation.
struct Trace {
  std::vector<double> query_key;  // W_K q, so score_l = x_l . query_key / sqrt(d)
  std::vector<double> attn;
  std::vector<double> mixed;      // sum_l a_l x_l
  std::vector<double> pooled;     // mixed W_V
  std::vector<double> logits;
  std::vector<double> probs;
  double scale = 1.0;
};

Trace run_forward(const ProbeParams& p, const HiddenStates& x) {
  const std::size_t d = p.dim();
  const std::size_t classes = p.num_classes();
  Trace t;
  t.scale = 1.0 / std::sqrt(static_cast<double>(d));

  t.query_key.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const auto wk = p.key_proj.row(j);
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      acc += wk[k] * p.query[k];
    }
    t.query_key[j] = acc;
  }

  std::vector<double> scores(x.length);
  for (std::size_t l = 0; l < x.length; ++l) {
    const auto row = x.row(l);
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      acc += static_cast<double>(row[j]) * t.query_key[j];
    }
    scores[l] = acc * t.scale;
  }
  t.attn.resize(x.length);
  softmax(scores, t.attn);

  t.mixed.assign(d, 0.0);
  for (std::size_t l = 0; l < x.length; ++l) {
    const auto row = x.row(l);
    for (std::size_t j = 0; j < d; ++j) {
      t.mixed[j] += t.attn[l] * static_cast<double>(row[j]);
    }
  }

  t.pooled.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const auto wv = p.value_proj.row(j);
    for (std::size_t k = 0; k < d; ++k) {
      t.pooled[k] += t.mixed[j] * wv[k];
    }
  }

  t.logits.assign(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    const auto wc = p.classifier_weights.row(c);
    double acc = p.classifier_bias[c];
    for (std::size_t k = 0; k < d; ++k) {
      acc += wc[k] * t.pooled[k];
    }
    t.logits[c] = acc;
  }
  t.probs.resize(classes);
  softmax(t.logits, t.probs);
  return t;
}

// Offsets of each parameter group inside the flat layout.
struct Layout {
  std::size_t key = 0, value = 0, query = 0, weights = 0, bias = 0, end = 0;
  explicit Layout(const ProbeParams& p) {
    const std::size_t d = p.dim();
    key = 0;
    value = key + d * d;
    query = value + d * d;
    weights = query + d;
    bias = weights + p.num_classes() * d;
    end = bias + p.num_classes();
  }
};

}  // namespace

ProbeParams::ProbeParams(std::size_t dim, std::size_t num_classes)
    : key_proj(dim, dim),
      value_proj(dim, dim),
      query(dim, 0.0),
      classifier_weights(num_classes, dim),
      classifier_bias(num_classes, 0.0) {}

std::size_t ProbeParams::parameter_count() const { return Layout(*this).end; }

std::vector<double> ProbeParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto* block : {&key_proj, &value_proj}) {
    flat.insert(flat.end(), block->values().begin(), block->values().end());
  }
  flat.insert(flat.end(), query.begin(), query.end());
  flat.insert(flat.end(), classifier_weights.values().begin(), classifier_weights.values().end());
  flat.insert(flat.end(), classifier_bias.begin(), classifier_bias.end());
  return flat;
}

void ProbeParams::unflatten(std::span<const double> flat) {
  const Layout at(*this);
  if (flat.size() != at.end) {
    throw DimensionMismatch("ProbeParams::unflatten: expected " + std::to_string(at.end) + " values, got " +
                            std::to_string(flat.size()));
  }
  auto copy = [&](std::size_t from, std::span<double> to) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(from), to.size(), to.begin());
  };
  copy(at.key, key_proj.values());
  copy(at.value, value_proj.values());
  copy(at.query, query);
  copy(at.weights, classifier_weights.values());
  copy(at.bias, classifier_bias);
}

void ProbeParams::validate() const {
  const std::size_t d = dim();
  const std::size_t c = num_classes();
  if (d == 0 || c == 0) {
    throw DimensionMismatch("ProbeParams: dim and class count must be positive");
  }
  if (key_proj.rows() != d || key_proj.cols() != d || value_proj.rows() != d || value_proj.cols() != d ||
      classifier_weights.rows() != c || classifier_weights.cols() != d) {
    throw DimensionMismatch("ProbeParams: inconsistent parameter shapes");
  }
  if (!finite(key_proj.values()) || !finite(value_proj.values()) || !finite(query) ||
      !finite(classifier_weights.values()) || !finite(classifier_bias)) {
    throw ValidationError("ProbeParams: non-finite parameter");
  }
}

ProbeParams init_params(std::size_t dim, std::uint64_t seed, std::size_t num_classes) {
  if (dim == 0) {
    throw ArgumentError("init_params: dim must be positive");
  }
  if (num_classes < 2) {
    throw ArgumentError("init_params: need at least two classes");
  }
  ProbeParams p(dim, num_classes);
  Rng rng(seed);
  auto xavier = [&](Matrix& m) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (double& v : m.values()) {
      v = rng.uniform(-bound, bound);
    }
  };
  xavier(p.key_proj);
  xavier(p.value_proj);
  xavier(p.classifier_weights);
  const double query_std = 1.0 / std::sqrt(static_cast<double>(dim));
  for (double& v : p.query) {
    v = rng.normal(0.0, query_std);
  }
  return p;
}

ProbeOutput forward(const ProbeParams& params, const HiddenStates& x) {
  check_input(params, x);
  Trace t = run_forward(params, x);
  return {std::move(t.probs), std::move(t.attn), std::move(t.pooled)};
}

double accumulate_loss_and_grads(const ProbeParams& p, const HiddenStates& x, std::size_t label,
                                 std::span<double> flat_grad) {
  check_input(p, x);
  const std::size_t d = p.dim();
  const std::size_t classes = p.num_classes();
  if (label >= classes) {
    throw ArgumentError("loss_and_grads: label " + std::to_string(label) + " out of range");
  }
  const Layout at(p);
  if (flat_grad.size() != at.end) {
    throw DimensionMismatch("loss_and_grads: gradient buffer has the wrong size");
  }
  const Trace t = run_forward(p, x);
  const double loss = cross_entropy(t.logits, label);

  // dL/dz = probs - onehot(label)
  std::vector<double> dlogits = t.probs;
  dlogits[label] -= 1.0;

  std::vector<double> dpooled(d, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    const auto wc = p.classifier_weights.row(c);
    double* gw = flat_grad.data() + at.weights + c * d;
    for (std::size_t k = 0; k < d; ++k) {
      gw[k] += dlogits[c] * t.pooled[k];
      dpooled[k] += dlogits[c] * wc[k];
    }
    flat_grad[at.bias + c] += dlogits[c];
  }

  // pooled = mixed W_V
  std::vector<double> dmixed(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const auto wv = p.value_proj.row(j);
    double* gv = flat_grad.data() + at.value + j * d;
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      gv[k] += t.mixed[j] * dpooled[k];
      acc += wv[k] * dpooled[k];
    }
    dmixed[j] = acc;
  }

  // mixed = sum_l a_l x_l, then through the softmax Jacobian.
  std::vector<double> dattn(x.length);
  double weighted = 0.0;
  for (std::size_t l = 0; l < x.length; ++l) {
    const auto row = x.row(l);
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      acc += static_cast<double>(row[j]) * dmixed[j];
    }
    dattn[l] = acc;
    weighted += t.attn[l] * acc;
  }
  std::vector<double> dquery_key(d, 0.0);
  for (std::size_t l = 0; l < x.length; ++l) {
    const double dscore = t.attn[l] * (dattn[l] - weighted) * t.scale;
    const auto row = x.row(l);
    for (std::size_t j = 0; j < d; ++j) {
      dquery_key[j] += dscore * static_cast<double>(row[j]);
    }
  }

  // query_key = W_K q
  for (std::size_t j = 0; j < d; ++j) {
    const auto wk = p.key_proj.row(j);
    double* gk = flat_grad.data() + at.key + j * d;
    for (std::size_t k = 0; k < d; ++k) {
      gk[k] += dquery_key[j] * p.query[k];
      flat_grad[at.query + k] += wk[k] * dquery_key[j];
    }
  }
  return loss;
}

LossAndGrads loss_and_grads(const ProbeParams& params, const HiddenStates& x, std::size_t label) {
  std::vector<double> flat(params.parameter_count(), 0.0);
  LossAndGrads out;
  out.loss = accumulate_loss_and_grads(params, x, label, flat);
  out.grads = ProbeParams(params.dim(), params.num_classes());
  out.grads.unflatten(flat);
  return out;
}

double loss(const ProbeParams& params, const HiddenStates& x, std::size_t label) {
  check_input(params, x);
  if (label >= params.num_classes()) {
    throw ArgumentError("loss: label " + std::to_string(label) + " out of range");
  }
  const Trace t = run_forward(params, x);
  return cross_entropy(t.logits, label);
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

std::size_t predict(const ProbeParams& params, const HiddenStates& x) { return argmax(forward(params, x).probs); }

}  // namespace probekit
