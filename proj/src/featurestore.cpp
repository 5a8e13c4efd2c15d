// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "probekit/featurestore.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "probekit/error.hpp"
#include "probekit/io.hpp"
#include "probekit/rng.hpp"

namespace probekit {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'S', 'P', 'K'};

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto bits = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out += static_cast<char>(bits & 0xFFU);
    bits = static_cast<U>(bits >> 8U);
  }
}

template <typename T>
T get_le(const unsigned char* bytes) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value = static_cast<T>(value | (static_cast<T>(bytes[i]) << (8U * i)));
  }
  return value;
}

// Sequential little-endian reader over an input stream; every short read is a
// truncation error.
class PackReader {
 public:
  explicit PackReader(const fs::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) {
      throw IoError("cannot open pack '" + path.string() + "'");
    }
  }

  void seek(std::uint64_t offset) {
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(offset));
    if (!in_) {
      throw FormatError("pack '" + path_.string() + "': offset " + std::to_string(offset) + " out of range");
    }
  }

  std::uint64_t tell() { return static_cast<std::uint64_t>(in_.tellg()); }

  void read_bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw FormatError("pack '" + path_.string() + "': truncated while reading " + what);
    }
  }

  template <typename T>
  T read(const char* what) {
    std::array<unsigned char, sizeof(T)> buf{};
    read_bytes(reinterpret_cast<char*>(buf.data()), buf.size(), what);
    return get_le<T>(buf.data());
  }

  std::string read_string(const char* what) {
    const auto len = read<std::uint16_t>(what);
    std::string s(len, '\0');
    read_bytes(s.data(), len, what);
    return s;
  }

  PackHeader header() {
    std::array<char, 4> magic{};
    read_bytes(magic.data(), magic.size(), "magic");
    if (magic != kMagic) {
      throw FormatError("pack '" + path_.string() + "': bad magic bytes");
    }
    PackHeader h;
    h.version = read<std::uint32_t>("version");
    if (h.version != kPackVersion) {
      throw FormatError("pack '" + path_.string() + "': unsupported version " + std::to_string(h.version));
    }
    h.dim = read<std::uint32_t>("dim");
    h.record_count = read<std::uint64_t>("record count");
    if (h.dim == 0) {
      throw FormatError("pack '" + path_.string() + "': dim is zero");
    }
    return h;
  }

  FeatureSequence record(std::uint32_t dim) {
    FeatureSequence seq;
    seq.segment_id = read_string("segment_id");
    seq.speaker_id = read_string("speaker_id");
    const auto gender = read<std::uint8_t>("gender");
    if (gender > 1) {
      throw FormatError("pack '" + path_.string() + "': invalid gender byte in '" + seq.segment_id + "'");
    }
    seq.gender = static_cast<Gender>(gender);
    const auto length = read<std::uint32_t>("length");
    if (length == 0) {
      throw FormatError("pack '" + path_.string() + "': zero-length record '" + seq.segment_id + "'");
    }
    seq.states = HiddenStates(length, dim);
    const std::size_t count = static_cast<std::size_t>(length) * dim;
    std::vector<unsigned char> raw(count * 4);
    read_bytes(reinterpret_cast<char*>(raw.data()), raw.size(), "payload");
    for (std::size_t i = 0; i < count; ++i) {
      seq.states.values[i] = std::bit_cast<float>(get_le<std::uint32_t>(raw.data() + 4 * i));
    }
    if (!seq.states.all_finite()) {
      throw ValidationError("pack '" + path_.string() + "': non-finite value in '" + seq.segment_id + "'");
    }
    return seq;
  }

 private:
  fs::path path_;
  std::ifstream in_;
};

void append_record(std::string& out, const FeatureSequence& seq) {
  put_le(out, static_cast<std::uint16_t>(seq.segment_id.size()));
  out += seq.segment_id;
  put_le(out, static_cast<std::uint16_t>(seq.speaker_id.size()));
  out += seq.speaker_id;
  put_le(out, static_cast<std::uint8_t>(seq.gender));
  put_le(out, static_cast<std::uint32_t>(seq.states.length));
  for (float v : seq.states.values) {
    put_le(out, std::bit_cast<std::uint32_t>(v));
  }
}

}  // namespace

std::string_view to_string(Gender gender) { return gender == Gender::She ? "She" : "He"; }

Gender parse_gender(std::string_view text) {
  if (text == "She") return Gender::She;
  if (text == "He") return Gender::He;
  throw ValidationError("invalid gender '" + std::string(text) + "' (expected She or He)");
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Dev:
      return "dev";
    case Split::Test:
      return "test";
  }
  return "test";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "dev") return Split::Dev;
  if (text == "test") return Split::Test;
  throw ValidationError("invalid split '" + std::string(text) + "'");
}

DatasetManifest write_pack(std::span<const FeatureSequence> sequences, const fs::path& path,
                           const PackWriteOptions& options) {
  DatasetManifest manifest;
  manifest.pack_path = path.string();
  if (!sequences.empty()) {
    manifest.dim = static_cast<std::uint32_t>(sequences.front().states.dim);
  }
  std::unordered_set<std::string> seen;
  for (const auto& seq : sequences) {
    const auto& x = seq.states;
    if (x.dim != manifest.dim) {
      throw DimensionMismatch("write_pack: '" + seq.segment_id + "' has dim " + std::to_string(x.dim) +
                              ", expected " + std::to_string(manifest.dim));
    }
    if (x.length == 0 || x.dim == 0 || x.values.size() != x.length * x.dim) {
      throw ValidationError("write_pack: '" + seq.segment_id + "' has an empty or malformed state matrix");
    }
    if (x.length > options.max_length) {
      throw ValidationError("write_pack: '" + seq.segment_id + "' has " + std::to_string(x.length) +
                            " states, above the maximum of " + std::to_string(options.max_length));
    }
    if (!x.all_finite()) {
      throw ValidationError("write_pack: non-finite value in '" + seq.segment_id + "'");
    }
    if (seq.segment_id.size() > UINT16_MAX || seq.speaker_id.size() > UINT16_MAX) {
      throw ValidationError("write_pack: identifier too long in '" + seq.segment_id + "'");
    }
    if (!seen.insert(seq.segment_id).second) {
      throw ValidationError("write_pack: duplicate segment_id '" + seq.segment_id + "'");
    }
  }

  std::string bytes(kMagic.begin(), kMagic.end());
  put_le(bytes, kPackVersion);
  put_le(bytes, manifest.dim);
  put_le(bytes, static_cast<std::uint64_t>(sequences.size()));
  for (const auto& seq : sequences) {
    manifest.entries.push_back({seq.segment_id, seq.speaker_id, seq.gender, std::nullopt,
                                static_cast<std::uint64_t>(bytes.size()),
                                static_cast<std::uint32_t>(seq.states.length)});
    append_record(bytes, seq);
  }
  write_file_atomic(path, bytes);
  return manifest;
}

PackHeader read_pack_header(const fs::path& path) {
  PackReader reader(path);
  return reader.header();
}

std::vector<FeatureSequence> read_pack(const fs::path& path, const DatasetManifest& manifest) {
  std::vector<FeatureSequence> out;
  if (manifest.entries.empty()) {
    return out;
  }
  PackReader reader(path);
  const PackHeader header = reader.header();
  if (header.dim != manifest.dim) {
    throw FormatError("pack '" + path.string() + "' has dim " + std::to_string(header.dim) + " but manifest says " +
                      std::to_string(manifest.dim));
  }
  out.reserve(manifest.entries.size());
  for (const auto& entry : manifest.entries) {
    if (entry.byte_offset < kPackHeaderBytes) {
      throw FormatError("manifest entry '" + entry.segment_id + "' points into the pack header");
    }
    reader.seek(entry.byte_offset);
    FeatureSequence seq = reader.record(header.dim);
    if (seq.segment_id != entry.segment_id) {
      throw FormatError("manifest entry '" + entry.segment_id + "' resolves to record '" + seq.segment_id + "'");
    }
    if (seq.states.length != entry.length) {
      throw FormatError("manifest entry '" + entry.segment_id + "' length does not match the pack");
    }
    out.push_back(std::move(seq));
  }
  return out;
}

DatasetManifest scan_pack(const fs::path& path) {
  PackReader reader(path);
  const PackHeader header = reader.header();
  DatasetManifest manifest;
  manifest.pack_path = path.string();
  manifest.dim = header.dim;
  for (std::uint64_t i = 0; i < header.record_count; ++i) {
    const std::uint64_t offset = reader.tell();
    FeatureSequence seq = reader.record(header.dim);
    manifest.entries.push_back({seq.segment_id, seq.speaker_id, seq.gender, std::nullopt, offset,
                                static_cast<std::uint32_t>(seq.states.length)});
  }
  return manifest;
}

std::string manifest_to_jsonl(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json row;
    row["segment_id"] = e.segment_id;
    row["speaker_id"] = e.speaker_id;
    row["gender"] = to_string(e.gender);
    row["split"] = e.split ? nlohmann::ordered_json(to_string(*e.split)) : nlohmann::ordered_json(nullptr);
    row["byte_offset"] = e.byte_offset;
    row["length"] = e.length;
    out += row.dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  write_file_atomic(path, manifest_to_jsonl(manifest));
}

DatasetManifest parse_manifest_jsonl(std::string_view text) {
  DatasetManifest manifest;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      const auto row = nlohmann::json::parse(line);
      ManifestEntry e;
      e.segment_id = row.at("segment_id").get<std::string>();
      e.speaker_id = row.at("speaker_id").get<std::string>();
      e.gender = parse_gender(row.at("gender").get<std::string>());
      const auto& split = row.at("split");
      if (!split.is_null()) {
        e.split = parse_split(split.get<std::string>());
      }
      e.byte_offset = row.at("byte_offset").get<std::uint64_t>();
      e.length = row.at("length").get<std::uint32_t>();
      manifest.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return manifest;
}

DatasetManifest read_manifest(const fs::path& manifest_path, const fs::path& pack_path) {
  DatasetManifest manifest = parse_manifest_jsonl(read_file(manifest_path));
  manifest.pack_path = pack_path.string();
  manifest.dim = read_pack_header(pack_path).dim;
  validate_manifest(manifest);
  return manifest;
}

void validate_manifest(const DatasetManifest& manifest) {
  std::unordered_set<std::string> ids;
  std::unordered_map<std::string, Gender> speaker_gender;
  std::unordered_map<std::string, Split> speaker_split;
  for (const auto& e : manifest.entries) {
    if (!ids.insert(e.segment_id).second) {
      throw ValidationError("manifest: duplicate segment_id '" + e.segment_id + "'");
    }
    const auto [g, fresh] = speaker_gender.emplace(e.speaker_id, e.gender);
    if (!fresh && g->second != e.gender) {
      throw ValidationError("manifest: speaker '" + e.speaker_id + "' has segments of both genders");
    }
    if (e.split) {
      const auto [s, first] = speaker_split.emplace(e.speaker_id, *e.split);
      if (!first && s->second != *e.split) {
        throw ValidationError("manifest: speaker '" + e.speaker_id + "' appears in more than one split");
      }
    }
  }
}

std::vector<std::optional<Split>> build_splits(std::span<const SplitCandidate> candidates, const SplitSpec& spec) {
  if (spec.train_size == 0 || spec.dev_size == 0) {
    throw ArgumentError("build_splits: train_size and dev_size must be positive");
  }
  if (!(spec.balance_tolerance >= 0.0 && spec.balance_tolerance < 0.5)) {
    throw ArgumentError("build_splits: balance_tolerance must lie in [0, 0.5)");
  }
  if (spec.train_size + spec.dev_size > candidates.size()) {
    throw InfeasibleSplit("build_splits: size constraint: train_size + dev_size = " +
                          std::to_string(spec.train_size + spec.dev_size) + " exceeds the " +
                          std::to_string(candidates.size()) + " available samples");
  }

  // Speakers keyed by id so the result does not depend on input order.
  struct Speaker {
    Gender gender;
    std::vector<std::size_t> segments;
  };
  std::map<std::string, Speaker> speakers;
  std::unordered_set<std::string_view> ids;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (!ids.insert(c.segment_id).second) {
      throw ValidationError("build_splits: duplicate segment_id '" + c.segment_id + "'");
    }
    auto [it, fresh] = speakers.try_emplace(c.speaker_id, Speaker{c.gender, {}});
    if (!fresh && it->second.gender != c.gender) {
      throw ValidationError("build_splits: inconsistent speaker metadata: speaker '" + c.speaker_id +
                            "' has segments of both genders");
    }
    it->second.segments.push_back(i);
  }

  Rng rng(spec.seed);
  std::array<std::vector<Speaker*>, 2> pools;
  for (auto& [id, speaker] : speakers) {
    std::sort(speaker.segments.begin(), speaker.segments.end(),
              [&](std::size_t a, std::size_t b) { return candidates[a].segment_id < candidates[b].segment_id; });
    pools[class_index(speaker.gender)].push_back(&speaker);
  }
  for (auto& pool : pools) {
    rng.shuffle(std::span(pool));
  }

  std::vector<std::optional<Split>> labels(candidates.size());
  std::set<const Speaker*> used;
  std::array<std::size_t, 2> cursor{0, 0};

  // Draws whole speakers of one gender until `wanted` segments are labelled.
  auto draw = [&](Gender gender, std::size_t wanted, Split split) {
    auto& pool = pools[class_index(gender)];
    auto& next = cursor[class_index(gender)];
    std::size_t taken = 0;
    while (taken < wanted && next < pool.size()) {
      Speaker* speaker = pool[next++];
      used.insert(speaker);
      std::vector<std::size_t> order = speaker->segments;
      rng.shuffle(std::span(order));
      for (std::size_t idx : order) {
        if (taken == wanted) {
          break;
        }
        labels[idx] = split;
        ++taken;
      }
    }
    return taken;
  };

  auto fill = [&](Split split, std::size_t size) {
    const std::size_t she_target = size / 2;
    std::size_t she = draw(Gender::She, she_target, split);
    std::size_t he = draw(Gender::He, size - she, split);
    if (she + he < size) {
      she += draw(Gender::She, size - she - he, split);
    }
    const std::string name(to_string(split));
    if (she + he < size) {
      throw InfeasibleSplit("build_splits: disjointness constraint: only " + std::to_string(she + he) + " of " +
                            std::to_string(size) + " " + name + " samples can be drawn from unused speakers");
    }
    const double gap = std::abs(static_cast<double>(she) - static_cast<double>(he));
    if (gap > spec.balance_tolerance * static_cast<double>(size)) {
      throw InfeasibleSplit("build_splits: balance constraint: " + name + " would hold " + std::to_string(she) +
                            " She / " + std::to_string(he) + " He, outside tolerance " +
                            format_double(spec.balance_tolerance));
    }
  };

  fill(Split::Train, spec.train_size);
  fill(Split::Dev, spec.dev_size);

  for (const auto& [id, speaker] : speakers) {
    if (!used.contains(&speaker)) {
      for (std::size_t idx : speaker.segments) {
        labels[idx] = Split::Test;
      }
    }
  }
  return labels;
}

void assign_splits(DatasetManifest& manifest, const SplitSpec& spec) {
  std::vector<SplitCandidate> candidates;
  candidates.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    candidates.push_back({e.segment_id, e.speaker_id, e.gender});
  }
  const auto labels = build_splits(candidates, spec);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    manifest.entries[i].split = labels[i];
  }
}

const std::vector<FeatureSequence>& Dataset::split(Split which) const {
  switch (which) {
    case Split::Train:
      return train;
    case Split::Dev:
      return dev;
    case Split::Test:
      return test;
  }
  return test;
}

Dataset load_dataset(const fs::path& pack_path, const DatasetManifest& manifest) {
  auto sequences = read_pack(pack_path, manifest);
  Dataset data;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const auto& split = manifest.entries[i].split;
    if (!split) {
      continue;
    }
    switch (*split) {
      case Split::Train:
        data.train.push_back(std::move(sequences[i]));
        break;
      case Split::Dev:
        data.dev.push_back(std::move(sequences[i]));
        break;
      case Split::Test:
        data.test.push_back(std::move(sequences[i]));
        break;
    }
  }
  return data;
}

}  // namespace probekit
