// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probekit/featurestore.hpp"

namespace probekit {

// One annotated gender-marked word (or multi-word expression) with its
// opposite-gender form.
struct GenderTerm {
  std::string correct_form;
  std::string wrong_form;
};

struct GenderAnnotationRecord {
  std::string segment_id;
  Gender gender = Gender::She;
  std::vector<GenderTerm> terms;
  std::string reference;
  std::string source;
};

enum class TermOutcome { Correct, Wrong, OutOfCoverage };

std::string_view to_string(TermOutcome outcome);
TermOutcome parse_term_outcome(std::string_view text);

struct TermTrace {
  std::string segment_id;
  std::size_t term_index = 0;
  Gender gender = Gender::She;
  TermOutcome outcome = TermOutcome::OutOfCoverage;
  bool manual = false;  // outcome set by a manual judgment

  friend bool operator==(const TermTrace&, const TermTrace&) = default;
};

struct GenderCounts {
  std::size_t n_terms = 0;
  std::size_t n_correct = 0;
  std::size_t n_wrong = 0;
  std::size_t n_ooc = 0;

  // Percentages; accuracy is absent when no term is in coverage.
  double coverage() const;
  std::optional<double> accuracy() const;

  void add(TermOutcome outcome);
  nlohmann::ordered_json to_json() const;

  friend bool operator==(const GenderCounts&, const GenderCounts&) = default;
};

struct GenderScore {
  GenderCounts she;
  GenderCounts he;
  GenderCounts all;
  std::vector<TermTrace> trace;
  std::vector<std::string> missing_outputs;  // annotated segments without a translation

  const GenderCounts& of(Gender gender) const { return gender == Gender::She ? she : he; }
  nlohmann::ordered_json to_json() const;
};

using TranslationMap = std::map<std::string, std::string, std::less<>>;

// Lowercases, splits on whitespace and apostrophes, and strips leading and
// trailing punctuation from every token. Empty tokens are dropped.
std::vector<std::string> normalize_tokens(std::string_view text);

// Per annotated term, in annotation order: the first unconsumed occurrence of
// the correct form wins, else the first unconsumed wrong form, else the term
// is out of coverage. Matched tokens are consumed for the rest of the segment.
std::vector<TermTrace> per_term_trace(const TranslationMap& outputs,
                                      std::span<const GenderAnnotationRecord> annotations);

GenderScore score(const TranslationMap& outputs, std::span<const GenderAnnotationRecord> annotations);

// Re-aggregates counts from a trace.
GenderScore score_trace(std::vector<TermTrace> trace);

enum class Verdict { Correct, Wrong, NotAssessable };

struct ManualJudgment {
  std::string segment_id;
  std::size_t term_index = 0;
  Verdict verdict = Verdict::NotAssessable;
};

// Moves manually judged out-of-coverage terms into the correct/wrong counts.
GenderScore merge_manual(const GenderScore& base, std::span<const ManualJudgment> judgments);

// Annotation TSV: header, then segment_id, gender, reference, terms where
// terms is a ';'-separated list of "correct<wrong>" pairs.
std::vector<GenderAnnotationRecord> parse_annotations_tsv(std::string_view text);
// segment_id TAB translation; an optional "segment_id" header line is skipped.
TranslationMap parse_outputs_tsv(std::string_view text);
// segment_id, term_index, verdict (correct / wrong / not_assessable).
std::vector<ManualJudgment> parse_judgments_tsv(std::string_view text);

std::string trace_to_tsv(std::span<const TermTrace> trace);
std::vector<TermTrace> parse_trace_tsv(std::string_view text);

}  // namespace probekit
