// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

// Runs the command-line tool and prepares small input files for it.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>
#include <sys/wait.h>

#include "probekit/featurestore.hpp"
#include "probekit/io.hpp"
#include "probekit/synthetic.hpp"

namespace probekit::testing {

inline std::string shell_quote(std::string_view arg) {
  std::string out = "'";
  for (char c : arg) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

// Exit status of `cli args...`; stdout and stderr go to `log` when given.
inline int run_cli(const std::filesystem::path& cli, const std::vector<std::string>& args,
                   const std::filesystem::path& log = {}, std::string_view env = {}) {
  std::string command;
  if (!env.empty()) command += std::string(env) + " ";
  command += shell_quote(cli.string());
  for (const auto& a : args) command += " " + shell_quote(a);
  command += log.empty() ? " >/dev/null 2>&1" : " >" + shell_quote(log.string()) + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Inputs for every subcommand: a labelled synthetic pack, gender
// annotations and translations for the test segments, and a points CSV.
struct CliWorkspace {
  std::filesystem::path pack;
  std::filesystem::path manifest;
  std::filesystem::path annotations;
  std::filesystem::path outputs;
  std::filesystem::path judgments;
  std::filesystem::path points;
};

inline CliWorkspace write_cli_workspace(const std::filesystem::path& dir) {
  SyntheticSpec spec;
  spec.dim = 6;
  spec.min_length = 10;
  spec.max_length = 40;
  spec.train_count = 160;
  spec.dev_count = 40;
  spec.test_count = 40;
  spec.seed = 11;
  const Dataset data = make_synthetic_dataset(spec);
  const LabelledPool pool = flatten_dataset(data);

  CliWorkspace ws{dir / "pack.fspk", dir / "manifest.jsonl", dir / "annotations.tsv",
                  dir / "outputs.tsv", dir / "judgments.tsv", dir / "points.csv"};
  DatasetManifest manifest = write_pack(pool.sequences, ws.pack);
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) manifest.entries[i].split = pool.splits[i];
  write_manifest(manifest, ws.manifest);

  std::string annotations = "segment_id\tgender\treference\tterms\n";
  std::string outputs = "segment_id\ttranslation\n";
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    const auto& seq = data.test[i];
    const bool she = seq.gender == Gender::She;
    annotations += seq.segment_id + "\t" + std::string(to_string(seq.gender)) + "\t" +
                   (she ? "je suis née" : "je suis né") + "\t" + (she ? "née<né>" : "né<née>") + "\n";
    // Every third output uses the other form, every fifth drops the term.
    std::string text = "je suis ";
    if (i % 5 == 4) {
      text += "là";
    } else {
      text += (she != (i % 3 == 2)) ? "née" : "né";
    }
    outputs += seq.segment_id + "\t" + text + "\n";
  }
  write_file_atomic(ws.annotations, annotations);
  write_file_atomic(ws.outputs, outputs);
  write_file_atomic(ws.judgments, "segment_id\tterm_index\tverdict\n" + data.test[4].segment_id + "\t0\tcorrect\n");
  write_file_atomic(ws.points,
                    "model,language,f1,accuracy\n"
                    "a,es,60.0,60.1\na,fr,70.0,67.2\nb,es,80.0,75.9\nb,fr,75.0,71.3\n");
  return ws;
}

}  // namespace probekit::testing
