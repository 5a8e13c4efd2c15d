// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "probekit/gendereval.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "probekit/error.hpp"
#include "probekit/io.hpp"

namespace probekit {

namespace {

// ---- minimal UTF-8 handling ------------------------------------------------

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0U) == 0xC0U) {
      cp = b0 & 0x1FU;
      extra = 1;
    } else if ((b0 & 0xF0U) == 0xE0U) {
      cp = b0 & 0x0FU;
      extra = 2;
    } else if ((b0 & 0xF8U) == 0xF0U) {
      cp = b0 & 0x07U;
      extra = 3;
    } else {
      out.push_back(U'�');
      ++i;
      continue;
    }
    bool valid = true;
    for (std::size_t k = 1; k <= extra; ++k) {
      if (i + k >= s.size() || (static_cast<unsigned char>(s[i + k]) & 0xC0U) != 0x80U) {
        valid = false;
        break;
      }
      cp = (cp << 6U) | (static_cast<unsigned char>(s[i + k]) & 0x3FU);
    }
    if (!valid) {
      out.push_back(U'�');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0U | (cp >> 6U));
    out += static_cast<char>(0x80U | (cp & 0x3FU));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0U | (cp >> 12U));
    out += static_cast<char>(0x80U | ((cp >> 6U) & 0x3FU));
    out += static_cast<char>(0x80U | (cp & 0x3FU));
  } else {
    out += static_cast<char>(0xF0U | (cp >> 18U));
    out += static_cast<char>(0x80U | ((cp >> 12U) & 0x3FU));
    out += static_cast<char>(0x80U | ((cp >> 6U) & 0x3FU));
    out += static_cast<char>(0x80U | (cp & 0x3FU));
  }
}

// Lowercasing for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic,
// which covers the Romance target languages.
char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 0x20;
  if (c < 0xC0) return c;
  if (c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c >= 0x100 && c <= 0x17F) {
    if (c == 0x130) return U'i';
    if (c == 0x178) return 0xFF;
    const bool odd_upper = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
    if (odd_upper) return (c % 2 == 1) ? c + 1 : c;
    if (c == 0x138 || c == 0x149 || c == 0x17F) return c;
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f' || c == 0xA0 ||
         c == 0x202F || c == 0x2009 || c == 0x200B || c == 0x3000;
}

bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019 || c == 0x02BC; }

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  return c == 0xA1 || c == 0xAB || c == 0xBB || c == 0xBF || c == 0xB7 || (c >= 0x2010 && c <= 0x2027) ||
         (c >= 0x2030 && c <= 0x205E) || c == 0x3001 || c == 0x3002;
}

std::string parse_term_side(std::string_view text) {
  const auto start = text.find_first_not_of(" \t");
  if (start == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(" \t");
  return std::string(text.substr(start, end - start + 1));
}

void validate_record(const GenderAnnotationRecord& r) {
  if (r.segment_id.empty()) {
    throw ValidationError("annotation: empty segment_id");
  }
  if (r.terms.empty()) {
    throw ValidationError("annotation '" + r.segment_id + "': no annotated terms");
  }
  for (const auto& t : r.terms) {
    const auto correct = normalize_tokens(t.correct_form);
    const auto wrong = normalize_tokens(t.wrong_form);
    if (correct.empty() || wrong.empty()) {
      throw ValidationError("annotation '" + r.segment_id + "': empty term form");
    }
    if (correct == wrong) {
      throw ValidationError("annotation '" + r.segment_id + "': correct and wrong forms coincide ('" +
                            t.correct_form + "')");
    }
  }
}

// First start index where `form` matches unconsumed tokens, if any.
std::optional<std::size_t> find_form(const std::vector<std::string>& tokens, const std::vector<bool>& consumed,
                                     const std::vector<std::string>& form) {
  if (form.size() > tokens.size()) return std::nullopt;
  for (std::size_t i = 0; i + form.size() <= tokens.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < form.size(); ++k) {
      if (consumed[i + k] || tokens[i + k] != form[k]) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::nullopt;
}

std::size_t parse_index(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(std::string(what) + ": invalid integer '" + std::string(text) + "'");
  }
  return value;
}

bool is_header(const std::string& line) { return line.rfind("segment_id", 0) == 0; }

}  // namespace

std::vector<std::string> normalize_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::vector<char32_t> current;
  auto flush = [&] {
    std::size_t begin = 0;
    std::size_t end = current.size();
    while (begin < end && is_punct(current[begin])) ++begin;
    while (end > begin && is_punct(current[end - 1])) --end;
    if (begin < end) {
      std::string token;
      for (std::size_t i = begin; i < end; ++i) {
        encode_utf8(to_lower(current[i]), token);
      }
      tokens.push_back(std::move(token));
    }
    current.clear();
  };
  for (char32_t c : decode_utf8(text)) {
    if (is_space(c) || is_apostrophe(c)) {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return tokens;
}

std::string_view to_string(TermOutcome outcome) {
  switch (outcome) {
    case TermOutcome::Correct:
      return "correct";
    case TermOutcome::Wrong:
      return "wrong";
    case TermOutcome::OutOfCoverage:
      return "ooc";
  }
  return "ooc";
}

TermOutcome parse_term_outcome(std::string_view text) {
  if (text == "correct") return TermOutcome::Correct;
  if (text == "wrong") return TermOutcome::Wrong;
  if (text == "ooc") return TermOutcome::OutOfCoverage;
  throw FormatError("invalid term outcome '" + std::string(text) + "'");
}

double GenderCounts::coverage() const {
  if (n_terms == 0) return 0.0;
  return 100.0 * static_cast<double>(n_correct + n_wrong) / static_cast<double>(n_terms);
}

std::optional<double> GenderCounts::accuracy() const {
  const std::size_t covered = n_correct + n_wrong;
  if (covered == 0) return std::nullopt;
  return 100.0 * static_cast<double>(n_correct) / static_cast<double>(covered);
}

void GenderCounts::add(TermOutcome outcome) {
  ++n_terms;
  switch (outcome) {
    case TermOutcome::Correct:
      ++n_correct;
      break;
    case TermOutcome::Wrong:
      ++n_wrong;
      break;
    case TermOutcome::OutOfCoverage:
      ++n_ooc;
      break;
  }
}

nlohmann::ordered_json GenderCounts::to_json() const {
  nlohmann::ordered_json j;
  j["n_terms"] = n_terms;
  j["n_correct"] = n_correct;
  j["n_wrong"] = n_wrong;
  j["n_ooc"] = n_ooc;
  j["coverage"] = round2(coverage());
  const auto acc = accuracy();
  j["accuracy"] = acc ? nlohmann::ordered_json(round2(*acc)) : nlohmann::ordered_json(nullptr);
  return j;
}

nlohmann::ordered_json GenderScore::to_json() const {
  nlohmann::ordered_json j;
  j["She"] = she.to_json();
  j["He"] = he.to_json();
  j["All"] = all.to_json();
  std::size_t manual = 0;
  for (const auto& t : trace) {
    if (t.manual) ++manual;
  }
  j["manual_judgments_applied"] = manual;
  j["missing_outputs"] = missing_outputs;
  return j;
}

std::vector<TermTrace> per_term_trace(const TranslationMap& outputs,
                                      std::span<const GenderAnnotationRecord> annotations) {
  if (annotations.empty()) {
    throw ArgumentError("gender scoring: empty annotation list");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& r : annotations) {
    if (!seen.insert(r.segment_id).second) {
      throw ValidationError("gender scoring: duplicate segment_id '" + r.segment_id + "' in annotations");
    }
    validate_record(r);
  }

  std::vector<TermTrace> trace;
  for (const auto& record : annotations) {
    const auto found = outputs.find(record.segment_id);
    const std::vector<std::string> tokens =
        found == outputs.end() ? std::vector<std::string>{} : normalize_tokens(found->second);
    std::vector<bool> consumed(tokens.size(), false);
    for (std::size_t i = 0; i < record.terms.size(); ++i) {
      TermTrace t{record.segment_id, i, record.gender, TermOutcome::OutOfCoverage, false};
      const auto& term = record.terms[i];
      const auto correct = normalize_tokens(term.correct_form);
      const auto wrong = normalize_tokens(term.wrong_form);
      std::optional<std::size_t> at = find_form(tokens, consumed, correct);
      std::size_t width = correct.size();
      if (at) {
        t.outcome = TermOutcome::Correct;
      } else if ((at = find_form(tokens, consumed, wrong))) {
        t.outcome = TermOutcome::Wrong;
        width = wrong.size();
      }
      if (at) {
        std::fill_n(consumed.begin() + static_cast<std::ptrdiff_t>(*at), width, true);
      }
      trace.push_back(std::move(t));
    }
  }
  return trace;
}

GenderScore score_trace(std::vector<TermTrace> trace) {
  GenderScore s;
  for (const auto& t : trace) {
    (t.gender == Gender::She ? s.she : s.he).add(t.outcome);
    s.all.add(t.outcome);
  }
  s.trace = std::move(trace);
  return s;
}

GenderScore score(const TranslationMap& outputs, std::span<const GenderAnnotationRecord> annotations) {
  GenderScore s = score_trace(per_term_trace(outputs, annotations));
  for (const auto& r : annotations) {
    if (!outputs.contains(r.segment_id)) {
      s.missing_outputs.push_back(r.segment_id);
    }
  }
  return s;
}

GenderScore merge_manual(const GenderScore& base, std::span<const ManualJudgment> judgments) {
  std::vector<TermTrace> trace = base.trace;
  std::map<std::pair<std::string_view, std::size_t>, std::size_t> index;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    index.emplace(std::pair<std::string_view, std::size_t>(trace[i].segment_id, trace[i].term_index), i);
  }
  std::set<std::size_t> judged;
  for (const auto& j : judgments) {
    const auto it = index.find({j.segment_id, j.term_index});
    const std::string where = "'" + j.segment_id + "' term " + std::to_string(j.term_index);
    if (it == index.end()) {
      throw ValidationError("merge_manual: judgment for unknown term " + where);
    }
    auto& term = trace[it->second];
    if (!judged.insert(it->second).second) {
      throw ConflictError("merge_manual: more than one judgment for " + where);
    }
    if (term.outcome != TermOutcome::OutOfCoverage) {
      throw ConflictError("merge_manual: " + where + " is already in coverage");
    }
    if (j.verdict == Verdict::Correct) {
      term.outcome = TermOutcome::Correct;
      term.manual = true;
    } else if (j.verdict == Verdict::Wrong) {
      term.outcome = TermOutcome::Wrong;
      term.manual = true;
    }
  }
  GenderScore merged = score_trace(std::move(trace));
  merged.missing_outputs = base.missing_outputs;
  return merged;
}

std::vector<GenderAnnotationRecord> parse_annotations_tsv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) {
    throw FormatError("annotations: missing header");
  }
  const auto header = split_fields(lines.front(), '\t');
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    column[header[i]] = i;
  }
  for (const char* required : {"segment_id", "gender", "reference", "terms"}) {
    if (!column.contains(required)) {
      throw FormatError(std::string("annotations: header lacks column '") + required + "'");
    }
  }
  const auto source_col = column.find("source");

  std::vector<GenderAnnotationRecord> records;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto fields = split_fields(lines[n], '\t');
    if (fields.size() < header.size()) {
      throw FormatError("annotations line " + std::to_string(n + 1) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    GenderAnnotationRecord r;
    r.segment_id = fields[column["segment_id"]];
    r.gender = parse_gender(fields[column["gender"]]);
    r.reference = fields[column["reference"]];
    if (source_col != column.end()) r.source = fields[source_col->second];
    for (const auto& pair : split_fields(fields[column["terms"]], ';')) {
      if (parse_term_side(pair).empty()) continue;
      const auto open = pair.find('<');
      const auto close = pair.rfind('>');
      if (open == std::string::npos || close == std::string::npos || close < open) {
        throw FormatError("annotations line " + std::to_string(n + 1) + ": malformed term '" + pair +
                          "' (expected correct<wrong>)");
      }
      r.terms.push_back({parse_term_side(std::string_view(pair).substr(0, open)),
                         parse_term_side(std::string_view(pair).substr(open + 1, close - open - 1))});
    }
    validate_record(r);
    records.push_back(std::move(r));
  }
  return records;
}

TranslationMap parse_outputs_tsv(std::string_view text) {
  TranslationMap outputs;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (line.empty() || (n == 0 && is_header(line))) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError("outputs line " + std::to_string(n + 1) + ": expected segment_id<TAB>translation");
    }
    const auto [it, fresh] = outputs.emplace(line.substr(0, tab), line.substr(tab + 1));
    if (!fresh) {
      throw ValidationError("outputs: duplicate segment_id '" + it->first + "'");
    }
  }
  return outputs;
}

std::vector<ManualJudgment> parse_judgments_tsv(std::string_view text) {
  std::vector<ManualJudgment> out;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (line.empty() || (n == 0 && is_header(line))) continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() < 3) {
      throw FormatError("judgments line " + std::to_string(n + 1) + ": expected 3 fields");
    }
    ManualJudgment j;
    j.segment_id = fields[0];
    j.term_index = parse_index(fields[1], "judgments");
    if (fields[2] == "correct") {
      j.verdict = Verdict::Correct;
    } else if (fields[2] == "wrong") {
      j.verdict = Verdict::Wrong;
    } else if (fields[2] == "not_assessable") {
      j.verdict = Verdict::NotAssessable;
    } else {
      throw FormatError("judgments line " + std::to_string(n + 1) + ": invalid verdict '" + fields[2] + "'");
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::string trace_to_tsv(std::span<const TermTrace> trace) {
  std::ostringstream out;
  out << "segment_id\tterm_index\tgender\toutcome\tmanual\n";
  for (const auto& t : trace) {
    out << t.segment_id << '\t' << t.term_index << '\t' << to_string(t.gender) << '\t' << to_string(t.outcome)
        << '\t' << (t.manual ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<TermTrace> parse_trace_tsv(std::string_view text) {
  std::vector<TermTrace> out;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (line.empty() || (n == 0 && is_header(line))) continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() < 4) {
      throw FormatError("trace line " + std::to_string(n + 1) + ": expected at least 4 fields");
    }
    TermTrace t;
    t.segment_id = fields[0];
    t.term_index = parse_index(fields[1], "trace");
    t.gender = parse_gender(fields[2]);
    t.outcome = parse_term_outcome(fields[3]);
    t.manual = fields.size() > 4 && fields[4] == "1";
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace probekit
