// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "probekit/checkpoint.hpp"

#include <bit>
#include <cstdint>

#include "probekit/error.hpp"
#include "probekit/io.hpp"

namespace probekit {

namespace {

std::string pack_floats(std::span<const double> values) {
  std::string bytes;
  bytes.reserve(values.size() * 4);
  for (double v : values) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int i = 0; i < 4; ++i) {
      bytes += static_cast<char>(bits & 0xFFU);
      bits >>= 8U;
    }
  }
  return base64_encode(bytes);
}

std::vector<double> unpack_floats(std::string_view encoded) {
  const std::string bytes = base64_decode(encoded);
  if (bytes.size() % 4 != 0) {
    throw FormatError("checkpoint: parameter blob is not a whole number of float32 values");
  }
  std::vector<double> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + k])) << (8U * k);
    }
    values[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return values;
}

}  // namespace

std::string_view to_string(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::Attention:
      return "attention";
    case ProbeKind::MaxPool:
      return "max";
    case ProbeKind::MeanPool:
      return "mean";
    case ProbeKind::Positional:
      return "positional";
  }
  return "attention";
}

ProbeKind parse_probe_kind(std::string_view text) {
  if (text == "attention") return ProbeKind::Attention;
  if (text == "max") return ProbeKind::MaxPool;
  if (text == "mean") return ProbeKind::MeanPool;
  if (text == "positional") return ProbeKind::Positional;
  throw ArgumentError("unknown probe kind '" + std::string(text) + "'");
}

std::string checkpoint_to_json(const Checkpoint& c) {
  nlohmann::ordered_json j;
  j["format"] = "probekit-checkpoint";
  j["format_version"] = kCheckpointVersion;
  j["kind"] = to_string(c.kind);
  j["d"] = c.dim();
  j["C"] = c.num_classes();
  j["labels"] = c.labels;
  j["position_slot"] = c.position_slot ? nlohmann::ordered_json(*c.position_slot) : nlohmann::ordered_json(nullptr);
  j["metadata"] = c.metadata;
  j["params_encoding"] = "float32-le-base64";
  const auto flat = c.kind == ProbeKind::Attention ? c.attention.flatten() : c.linear.flatten();
  j["params"] = pack_floats(flat);
  return j.dump(2) + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  Checkpoint c;
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    if (j.at("format").get<std::string>() != "probekit-checkpoint") {
      throw FormatError("checkpoint: unrecognized format tag");
    }
    if (j.at("format_version").get<int>() != kCheckpointVersion) {
      throw FormatError("checkpoint: unsupported format version");
    }
    c.kind = parse_probe_kind(j.at("kind").get<std::string>());
    const auto dim = j.at("d").get<std::size_t>();
    const auto classes = j.at("C").get<std::size_t>();
    if (dim == 0 || classes < 2) {
      throw FormatError("checkpoint: invalid shape");
    }
    c.labels = j.at("labels").get<std::vector<std::string>>();
    if (c.labels.size() != classes) {
      throw FormatError("checkpoint: label count does not match C");
    }
    if (!j.at("position_slot").is_null()) {
      c.position_slot = j.at("position_slot").get<std::size_t>();
      if (*c.position_slot >= kRelativePositions.size()) {
        throw FormatError("checkpoint: position_slot out of range");
      }
    }
    c.metadata = j.value("metadata", nlohmann::ordered_json::object());
    const auto flat = unpack_floats(j.at("params").get<std::string>());
    if (c.kind == ProbeKind::Attention) {
      c.attention = ProbeParams(dim, classes);
      c.attention.unflatten(flat);
      c.attention.validate();
    } else {
      c.linear = LinearProbeParams(dim, classes);
      c.linear.unflatten(flat);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("checkpoint: ") + ex.what());
  } catch (const DimensionMismatch& ex) {
    throw FormatError(std::string("checkpoint: ") + ex.what());
  }
  if (c.kind == ProbeKind::Positional && !c.position_slot) {
    throw FormatError("checkpoint: positional probe without position_slot");
  }
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_file_atomic(path, checkpoint_to_json(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file(path)); }

Checkpoint quantize(Checkpoint checkpoint) {
  auto round_all = [](std::span<double> values) {
    for (double& v : values) v = static_cast<double>(static_cast<float>(v));
  };
  round_all(checkpoint.attention.key_proj.values());
  round_all(checkpoint.attention.value_proj.values());
  round_all(checkpoint.attention.query);
  round_all(checkpoint.attention.classifier_weights.values());
  round_all(checkpoint.attention.classifier_bias);
  round_all(checkpoint.linear.weights.values());
  round_all(checkpoint.linear.bias);
  return checkpoint;
}

Prediction predict(const Checkpoint& checkpoint, const FeatureSequence& sequence) {
  Prediction p;
  switch (checkpoint.kind) {
    case ProbeKind::Attention: {
      auto out = forward(checkpoint.attention, sequence.states);
      p.probs = std::move(out.probs);
      p.attention = std::move(out.attn);
      break;
    }
    case ProbeKind::MaxPool:
      p.probs = linear_probs(checkpoint.linear, pool_max(sequence.states));
      break;
    case ProbeKind::MeanPool:
      p.probs = linear_probs(checkpoint.linear, pool_mean(sequence.states));
      break;
    case ProbeKind::Positional: {
      const std::size_t l = positional_indices(sequence.states.length)[*checkpoint.position_slot];
      const auto row = sequence.states.row(l);
      p.probs = linear_probs(checkpoint.linear, std::vector<double>(row.begin(), row.end()));
      break;
    }
  }
  p.label = argmax(p.probs);
  return p;
}

}  // namespace probekit
