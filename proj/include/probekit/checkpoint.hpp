// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "probekit/baselines.hpp"
#include "probekit/featurestore.hpp"
#include "probekit/probe.hpp"

namespace probekit {

enum class ProbeKind { Attention, MaxPool, MeanPool, Positional };

std::string_view to_string(ProbeKind kind);
ProbeKind parse_probe_kind(std::string_view text);

inline constexpr int kCheckpointVersion = 1;

// A trained probe on disk: a JSON document whose "params" field holds the
// parameters as base64 float32 little-endian values. Attention probes store
// key_proj, value_proj, query, classifier_weights, classifier_bias (row-major);
// linear probes store weights then bias.
struct Checkpoint {
  ProbeKind kind = ProbeKind::Attention;
  std::vector<std::string> labels = {"She", "He"};
  std::optional<std::size_t> position_slot;  // positional probes only
  ProbeParams attention;
  LinearProbeParams linear;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  std::size_t dim() const { return kind == ProbeKind::Attention ? attention.dim() : linear.dim(); }
  std::size_t num_classes() const {
    return kind == ProbeKind::Attention ? attention.num_classes() : linear.num_classes();
  }
};

std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view text);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Rounds every parameter through float32, matching what a save/load cycle
// produces.
Checkpoint quantize(Checkpoint checkpoint);

struct Prediction {
  std::size_t label = 0;
  std::vector<double> probs;
  std::vector<double> attention;  // attention probes only
};

Prediction predict(const Checkpoint& checkpoint, const FeatureSequence& sequence);

}  // namespace probekit
