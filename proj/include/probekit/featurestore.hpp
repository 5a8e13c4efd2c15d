// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probekit/matrix.hpp"

namespace probekit {

enum class Gender : std::uint8_t { She = 0, He = 1 };

std::string_view to_string(Gender gender);
Gender parse_gender(std::string_view text);

// Class index used by every probe: She = 0, He = 1.
inline std::size_t class_index(Gender gender) { return static_cast<std::size_t>(gender); }

enum class Split : std::uint8_t { Train, Dev, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct FeatureSequence {
  std::string segment_id;
  std::string speaker_id;
  Gender gender = Gender::She;
  HiddenStates states;

  friend bool operator==(const FeatureSequence&, const FeatureSequence&) = default;
};

struct ManifestEntry {
  std::string segment_id;
  std::string speaker_id;
  Gender gender = Gender::She;
  std::optional<Split> split;  // unset until build_splits assigns one
  std::uint64_t byte_offset = 0;
  std::uint32_t length = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::string pack_path;
  std::uint32_t dim = 0;
};

inline constexpr std::uint32_t kPackVersion = 1;
inline constexpr std::size_t kPackHeaderBytes = 20;

struct PackWriteOptions {
  // Longer segments are rejected rather than silently truncated.
  std::size_t max_length = 6000;
};

struct PackHeader {
  std::uint32_t version = 0;
  std::uint32_t dim = 0;
  std::uint64_t record_count = 0;
};

// Writes `sequences` as a feature pack (staged to a temporary file, renamed on
// success) and returns a manifest indexing every record. Splits are unset.
DatasetManifest write_pack(std::span<const FeatureSequence> sequences, const std::filesystem::path& path,
                           const PackWriteOptions& options = {});

PackHeader read_pack_header(const std::filesystem::path& path);

// Loads the records named by `manifest`, in manifest order.
std::vector<FeatureSequence> read_pack(const std::filesystem::path& path, const DatasetManifest& manifest);

// Rebuilds a manifest by walking the pack sequentially.
DatasetManifest scan_pack(const std::filesystem::path& path);

// JSON-lines sidecar, one object per record.
std::string manifest_to_jsonl(const DatasetManifest& manifest);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest parse_manifest_jsonl(std::string_view text);
// `dim` and `pack_path` come from the pack itself.
DatasetManifest read_manifest(const std::filesystem::path& manifest_path, const std::filesystem::path& pack_path);

// Throws ValidationError on duplicate segment ids, a speaker with two
// genders, or a speaker assigned to more than one split.
void validate_manifest(const DatasetManifest& manifest);

struct SplitSpec {
  std::size_t train_size = 0;
  std::size_t dev_size = 0;
  double balance_tolerance = 0.02;
  std::uint64_t seed = 0;
};

struct SplitCandidate {
  std::string segment_id;
  std::string speaker_id;
  Gender gender = Gender::She;
};

// Assigns train/dev by sampling whole speakers per gender, then drawing the
// chosen speakers' segments until the per-gender targets are met. Speakers
// never touched go to test; leftover segments of train/dev speakers stay
// unassigned. The result is parallel to `candidates`.
std::vector<std::optional<Split>> build_splits(std::span<const SplitCandidate> candidates, const SplitSpec& spec);

// Convenience: runs build_splits over the manifest entries in place.
void assign_splits(DatasetManifest& manifest, const SplitSpec& spec);

struct Dataset {
  std::vector<FeatureSequence> train;
  std::vector<FeatureSequence> dev;
  std::vector<FeatureSequence> test;

  const std::vector<FeatureSequence>& split(Split which) const;
};

Dataset load_dataset(const std::filesystem::path& pack_path, const DatasetManifest& manifest);

}  // namespace probekit
