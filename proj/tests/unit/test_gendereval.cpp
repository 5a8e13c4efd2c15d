// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <array>
#include <map>

#include "fixtures.hpp"
#include "probekit/error.hpp"
#include "probekit/gendereval.hpp"
#include "probekit/io.hpp"

using namespace probekit;

namespace {

const std::filesystem::path kData = std::filesystem::path(PROBEKIT_TEST_DATA_DIR) / "gender";

GenderAnnotationRecord record(std::string id, Gender g, std::vector<GenderTerm> terms) {
  return {std::move(id), g, std::move(terms), "", ""};
}

GenderScore score_one(const GenderAnnotationRecord& r, const std::string& output) {
  const TranslationMap outputs = {{r.segment_id, output}};
  return score(outputs, std::span(&r, 1));
}

std::vector<TermOutcome> outcomes(const std::vector<TermTrace>& trace) {
  std::vector<TermOutcome> out;
  for (const auto& t : trace) out.push_back(t.outcome);
  return out;
}

void check_counts(const GenderCounts& c, std::size_t terms, std::size_t correct, std::size_t wrong, std::size_t ooc) {
  CHECK(c.n_terms == terms);
  CHECK(c.n_correct == correct);
  CHECK(c.n_wrong == wrong);
  CHECK(c.n_ooc == ooc);
}

}  // namespace

TEST_SUITE("gendereval") {
  TEST_CASE("tokenization") {
    CHECK(normalize_tokens("Je suis NÉE, à Paris!") == std::vector<std::string>{"je", "suis", "née", "à", "paris"});
    CHECK(normalize_tokens("j'étais") == std::vector<std::string>{"j", "étais"});
    CHECK(normalize_tokens("l’étudiante") == std::vector<std::string>{"l", "étudiante"});
    CHECK(normalize_tokens("  «Prêt»  ...  ") == std::vector<std::string>{"prêt"});
    CHECK(normalize_tokens("ÜBER Ärger ÇA") == std::vector<std::string>{"über", "ärger", "ça"});
    CHECK(normalize_tokens("").empty());
  }

  TEST_CASE("single-term outcomes") {
    const auto r = record("a", Gender::She, {{"née", "né"}});
    auto s = score_one(r, "je suis née à paris");
    CHECK(s.all.coverage() == 100.0);
    CHECK(s.all.accuracy() == 100.0);
    CHECK(outcomes(s.trace) == std::vector<TermOutcome>{TermOutcome::Correct});

    s = score_one(r, "je suis né à paris");
    CHECK(s.all.coverage() == 100.0);
    CHECK(s.all.accuracy() == 0.0);
    CHECK(outcomes(s.trace) == std::vector<TermOutcome>{TermOutcome::Wrong});

    s = score_one(r, "je suis arrivée hier");
    CHECK(s.all.coverage() == 0.0);
    CHECK_FALSE(s.all.accuracy().has_value());
    CHECK(outcomes(s.trace) == std::vector<TermOutcome>{TermOutcome::OutOfCoverage});
    CHECK(s.to_json().at("All").at("accuracy").is_null());
  }

  TEST_CASE("a token satisfies at most one term") {
    const auto r = record("a", Gender::She, {{"née", "né"}, {"née", "né"}});
    const auto s = score_one(r, "je suis née hier");
    check_counts(s.all, 2, 1, 0, 1);
    CHECK(s.she.n_correct == 1);
    CHECK(s.he.n_terms == 0);
  }

  TEST_CASE("multi-word forms match contiguous tokens") {
    const auto r = record("a", Gender::She, {{"la directrice", "le directeur"}});
    CHECK(score_one(r, "Je suis LA directrice.").all.n_correct == 1);
    CHECK(score_one(r, "je suis le directeur").all.n_wrong == 1);
    CHECK(score_one(r, "la nouvelle directrice").all.n_ooc == 1);
  }

  TEST_CASE("empty outputs leave every term out of coverage") {
    const std::vector<GenderAnnotationRecord> records = {record("a", Gender::She, {{"née", "né"}}),
                                                         record("b", Gender::He, {{"né", "née"}, {"seul", "seule"}})};
    const auto trace = per_term_trace({}, records);
    REQUIRE(trace.size() == 3);
    for (const auto& t : trace) CHECK(t.outcome == TermOutcome::OutOfCoverage);
    const auto s = score({}, records);
    CHECK(s.missing_outputs == std::vector<std::string>{"a", "b"});
  }

  TEST_CASE("annotation errors") {
    CHECK_THROWS_AS(score({}, {}), ArgumentError);
    const std::vector<GenderAnnotationRecord> dup = {record("a", Gender::She, {{"née", "né"}}),
                                                     record("a", Gender::She, {{"née", "né"}})};
    CHECK_THROWS_AS(score({}, dup), ValidationError);
    const std::vector<GenderAnnotationRecord> same = {record("a", Gender::She, {{"Née", "née"}})};
    CHECK_THROWS_AS(score({}, same), ValidationError);
    const std::vector<GenderAnnotationRecord> empty = {record("a", Gender::She, {})};
    CHECK_THROWS_AS(score({}, empty), ValidationError);
  }

  TEST_CASE("merge arithmetic on a four-term base") {
    const std::vector<GenderAnnotationRecord> records = {
        record("a", Gender::She, {{"née", "né"}, {"venue", "venu"}, {"seule", "seul"}, {"prête", "prêt"}})};
    const TranslationMap outputs = {{"a", "née venue"}};
    const auto base = score(outputs, records);
    check_counts(base.all, 4, 2, 0, 2);
    const std::vector<ManualJudgment> judgments = {{"a", 2, Verdict::Correct}, {"a", 3, Verdict::Wrong}};
    const auto merged = merge_manual(base, judgments);
    check_counts(merged.all, 4, 3, 1, 0);
    CHECK(merged.all.coverage() == 100.0);
    CHECK(merged.all.accuracy() == 75.0);
    CHECK(merged.trace[2].manual);

    const auto same = merge_manual(base, {});
    CHECK(same.all == base.all);
    CHECK(same.trace == base.trace);

    const std::vector<ManualJudgment> on_covered = {{"a", 0, Verdict::Wrong}};
    CHECK_THROWS_AS(merge_manual(base, on_covered), ConflictError);
    const std::vector<ManualJudgment> unknown = {{"zz", 0, Verdict::Wrong}};
    CHECK_THROWS_AS(merge_manual(base, unknown), ValidationError);
    const std::vector<ManualJudgment> twice = {{"a", 2, Verdict::Correct}, {"a", 2, Verdict::Wrong}};
    CHECK_THROWS_AS(merge_manual(base, twice), ConflictError);

    const std::vector<ManualJudgment> unsure = {{"a", 2, Verdict::NotAssessable}};
    CHECK(merge_manual(base, unsure).all == base.all);
  }

  TEST_CASE("twelve-segment fixture") {
    const auto annotations = parse_annotations_tsv(read_file(kData / "annotations.tsv"));
    const auto outputs = parse_outputs_tsv(read_file(kData / "outputs.tsv"));
    REQUIRE(annotations.size() == 12);
    const auto s = score(outputs, annotations);
    check_counts(s.she, 10, 6, 2, 2);
    check_counts(s.he, 8, 4, 2, 2);
    check_counts(s.all, 18, 10, 4, 4);
    CHECK(s.missing_outputs == std::vector<std::string>{"s10"});
    const auto j = s.to_json();
    CHECK(j.at("She").at("coverage") == 80.0);
    CHECK(j.at("She").at("accuracy") == 75.0);
    CHECK(j.at("He").at("coverage") == 75.0);
    CHECK(j.at("He").at("accuracy") == 66.67);
    CHECK(j.at("All").at("coverage") == 77.78);
    CHECK(j.at("All").at("accuracy") == 71.43);

    using O = TermOutcome;
    std::map<std::string, std::vector<O>> by_segment;
    for (const auto& t : s.trace) by_segment[t.segment_id].push_back(t.outcome);
    CHECK(by_segment["s04"] == std::vector<O>{O::Correct, O::OutOfCoverage});
    CHECK(by_segment["s05"] == std::vector<O>{O::Correct, O::Wrong});
    CHECK(by_segment["s06"] == std::vector<O>{O::Correct});
    CHECK(by_segment["s08"] == std::vector<O>{O::OutOfCoverage});
    CHECK(by_segment["s09"] == std::vector<O>{O::Correct, O::Wrong, O::Correct});
    CHECK(by_segment["s11"] == std::vector<O>{O::Correct});
    CHECK(by_segment["s12"] == std::vector<O>{O::Correct, O::Correct, O::Wrong});

    const auto merged = merge_manual(s, parse_judgments_tsv(read_file(kData / "judgments.tsv")));
    check_counts(merged.she, 10, 7, 2, 1);
    check_counts(merged.he, 8, 4, 3, 1);
    check_counts(merged.all, 18, 11, 5, 2);
    const auto mj = merged.to_json();
    CHECK(mj.at("All").at("coverage") == 88.89);
    CHECK(mj.at("All").at("accuracy") == 68.75);
    CHECK(mj.at("manual_judgments_applied") == 2);
  }

  TEST_CASE("trace re-aggregates and round trips") {
    Rng rng(1);
    const std::vector<std::string> words = {"née", "né", "prête", "prêt", "seule", "seul", "de", "la"};
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<GenderAnnotationRecord> records;
      TranslationMap outputs;
      for (int r = 0; r < 10; ++r) {
        GenderAnnotationRecord rec = record("seg" + std::to_string(r), rng.index(2) ? Gender::She : Gender::He, {});
        const std::size_t terms = 1 + rng.index(3);
        for (std::size_t t = 0; t < terms; ++t) {
          const std::size_t pair = 2 * rng.index(3);
          rec.terms.push_back({words[pair], words[pair + 1]});
        }
        records.push_back(rec);
        // Each word pair shows up on one side only, so swapping the forms
        // cannot change which tokens a term may claim.
        std::array<std::size_t, 3> side{};
        for (auto& s : side) s = rng.index(2);
        std::string text;
        for (std::size_t k = rng.index(6); k > 0; --k) {
          const std::size_t w = rng.index(words.size());
          text += (w < 6 ? words[w - w % 2 + side[w / 2]] : words[w]) + " ";
        }
        if (rng.index(5) != 0) outputs[rec.segment_id] = text;
      }
      const auto s = score(outputs, records);
      const auto again = score_trace(s.trace);
      CHECK(again.all == s.all);
      CHECK(again.she == s.she);
      CHECK(again.he == s.he);
      CHECK(s.all.n_correct + s.all.n_wrong + s.all.n_ooc == s.all.n_terms);
      CHECK(parse_trace_tsv(trace_to_tsv(s.trace)) == s.trace);

      // Swapping forms swaps correct and wrong counts.
      auto swapped = records;
      for (auto& rec : swapped) {
        for (auto& term : rec.terms) std::swap(term.correct_form, term.wrong_form);
      }
      const auto flipped = score(outputs, swapped);
      CHECK(flipped.all.n_correct == s.all.n_wrong);
      CHECK(flipped.all.n_wrong == s.all.n_correct);
    }
  }

  TEST_CASE("single-term scores ignore token order") {
    Rng rng(2);
    const auto r = record("a", Gender::He, {{"prêt", "prête"}});
    std::vector<std::string> tokens = {"je", "suis", "prête", "à", "partir", "demain"};
    const auto reference = score_one(r, "je suis prête à partir demain").all;
    for (int trial = 0; trial < 20; ++trial) {
      rng.shuffle(std::span<std::string>(tokens));
      std::string text;
      for (const auto& t : tokens) text += t + " ";
      CHECK(score_one(r, text).all == reference);
    }
  }

  TEST_CASE("merge never lowers coverage") {
    const auto annotations = parse_annotations_tsv(read_file(kData / "annotations.tsv"));
    const auto outputs = parse_outputs_tsv(read_file(kData / "outputs.tsv"));
    const auto base = score(outputs, annotations);
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<ManualJudgment> judgments;
      for (const auto& t : base.trace) {
        if (t.outcome == TermOutcome::OutOfCoverage && rng.index(2)) {
          judgments.push_back({t.segment_id, t.term_index, static_cast<Verdict>(rng.index(3))});
        }
      }
      CHECK(merge_manual(base, judgments).all.coverage() >= base.all.coverage());
    }
  }

  TEST_CASE("TSV parsing errors") {
    CHECK_THROWS_AS(parse_annotations_tsv("segment_id\tgender\n"), FormatError);
    CHECK_THROWS_AS(parse_annotations_tsv("segment_id\tgender\treference\tterms\na\tShe\tx\tnée\n"), FormatError);
    CHECK_THROWS_AS(parse_annotations_tsv("segment_id\tgender\treference\tterms\na\tThey\tx\tnée<né>\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_outputs_tsv("a\tx\na\ty\n"), ValidationError);
    CHECK_THROWS_AS(parse_judgments_tsv("a\t0\tmaybe\n"), FormatError);
  }
}
