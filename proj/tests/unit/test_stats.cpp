#include <gtest/gtest.h>

#include <sstream>

#include "kcurate/corpus_io.hpp"
#include "kcurate/stats.hpp"
#include "support.hpp"

using namespace kcurate;
using kctest::error_of;

namespace {

Document tagged(const std::string& id, const std::string& text, std::optional<SourceKind> kind) {
  Document d = Document::make(id, text, "web");
  if (kind) d.tags.source = Source{*kind, std::nullopt};
  return d;
}

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + std::string("말");
  return s;
}

std::size_t whitespace_tokens(const std::string& t) {
  std::istringstream in(t);
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

}  // namespace

TEST(Distribution, OrganicSyntheticTokenRatio) {
  const std::vector<Document> corpus{tagged("o1", words(500), SourceKind::Organic),
                                     tagged("o2", words(357), SourceKind::Organic),
                                     tagged("s1", words(143), SourceKind::Synthetic)};
  const auto d = distribution(corpus, Axis::Source, WhitespaceTokenizer{});
  ASSERT_EQ(d.rows.size(), 2u);
  EXPECT_EQ(d.total_tokens, 1000u);
  EXPECT_NEAR(d.find("Organic")->token_share, 0.857, 1e-3);
  EXPECT_NEAR(d.find("Synthetic")->token_share, 0.143, 1e-3);
  EXPECT_NEAR(d.find("Organic")->doc_share, 2.0 / 3.0, 1e-12);
}

TEST(Distribution, UnknownRowLastAndSharesSumToOne) {
  const std::vector<Document> corpus{tagged("a", "하나 둘", std::nullopt), tagged("b", "셋", SourceKind::Synthetic),
                                     tagged("c", "넷 다섯 여섯", SourceKind::Organic)};
  const auto d = distribution(corpus, Axis::Source, WhitespaceTokenizer{}, 4);
  ASSERT_EQ(d.rows.size(), 3u);
  EXPECT_EQ(d.rows.back().label, "unknown");
  double s = 0;
  for (const auto& r : d.rows) s += r.token_share;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Distribution, CsvFormat) {
  const std::vector<Document> corpus{tagged("a", "x, y", SourceKind::Organic)};
  Document odd = Document::make("b", "z", "we,b");
  const std::vector<Document> c2{corpus[0], odd};
  const auto csv = to_csv(distribution(c2, Axis::SourceName, WhitespaceTokenizer{}));
  EXPECT_EQ(csv, "axis,label,docs,tokens,share\nsource_name,\"we,b\",1,1,0.333333\nsource_name,web,1,2,0.666667\n");
  EXPECT_EQ(to_csv(distribution(corpus, Axis::Source, WhitespaceTokenizer{}), false), "source,Organic,1,2,1.000000\n");
  EXPECT_EQ(error_of([] { parse_axis("colour"); }), ErrorCode::FormatError);
}

TEST(Distribution, FixtureMatchesReferenceCsv) {
  const auto corpus = read_corpus(kctest::data("stats_fixture.jsonl"));
  const auto d = distribution(corpus, Axis::Source, WhitespaceTokenizer{});
  EXPECT_EQ(to_csv(d), kctest::slurp(kctest::data("stats_fixture_source.csv")));
  std::map<std::string, std::size_t> tokens;
  for (const auto& doc : corpus) tokens[axis_label(doc, Axis::Source)] += whitespace_tokens(doc.text);
  for (const auto& r : d.rows) EXPECT_EQ(r.tokens, tokens[r.label]) << r.label;
}

TEST(Distribution, AllAxesCoverEveryDocument) {
  const auto corpus = read_corpus(kctest::data("stats_fixture.jsonl"));
  for (Axis a : kAxes) {
    const auto d = distribution(corpus, a, CharTokenizer{});
    std::size_t docs = 0;
    for (const auto& r : d.rows) docs += r.docs;
    EXPECT_EQ(docs, corpus.size()) << to_string(a);
    EXPECT_EQ(parse_axis(to_string(a)), a);
  }
}

TEST(Yield, IncompleteAuditRaises) {
  const Route route;
  Document d = Document::make("w", "본문", "cc");
  d.record(Stage::Dedup, Verdict::kept());
  EXPECT_EQ(error_of([&] { check_audit(d, route); }), ErrorCode::IncompleteAudit);
  d.record(Stage::Perplexity, Verdict::kept());  // skipped heuristic
  EXPECT_EQ(error_of([&] { check_audit(d, route); }), ErrorCode::IncompleteAudit);

  Document early = Document::make("r", "본문", "cc");
  early.record(Stage::Dedup, Verdict::kept());
  early.record(Stage::Heuristic, Verdict::rejected("hashtag_density"));
  EXPECT_FALSE(error_of([&] { check_audit(early, route); }));

  Document book = Document::make("b", "본문", "book");
  book.record(Stage::Refine, Verdict::kept());
  book.record(Stage::Dedup, Verdict::kept());
  EXPECT_EQ(error_of([&] { check_audit(book, route); }), ErrorCode::IncompleteAudit);
  book.record(Stage::FinalRefine, Verdict::kept());
  EXPECT_FALSE(error_of([&] { check_audit(book, route); }));
}

TEST(Yield, ReportMatchesAuditRecount) {
  const Route route;
  std::vector<Document> run;
  const auto& stages = route.enabled;
  // document i is rejected at stage i % (stages + 1); the last residue survives
  for (std::size_t i = 0; i < 45; ++i) {
    Document d = Document::make("d" + std::to_string(i), "본문", "cc");
    const std::size_t stop = i % (stages.size() + 1);
    for (std::size_t k = 0; k < stages.size(); ++k) {
      if (k == stop) {
        d.record(stages[k], Verdict::rejected("r" + std::to_string(k)));
        break;
      }
      d.record(stages[k], k % 2 ? Verdict::modified("m") : Verdict::kept());
    }
    run.push_back(std::move(d));
  }
  const auto r = yield_report(run, route);
  EXPECT_EQ(r.total_in, 45u);
  std::size_t survivors = 0;
  for (const auto& d : run) survivors += !d.rejected();
  EXPECT_EQ(r.survivors, survivors);
  EXPECT_DOUBLE_EQ(r.cumulative_yield, static_cast<double>(survivors) / 45.0);
  ASSERT_EQ(r.stages.size(), stages.size());
  std::size_t rejected_so_far = 0;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    std::size_t in = 0, rej = 0, kept = 0, mod = 0;
    for (const auto& d : run)
      for (const auto& e : d.audit)
        if (e.stage == stages[k]) {
          ++in;
          rej += e.verdict.kind == VerdictKind::Rejected;
          kept += e.verdict.kind == VerdictKind::Kept;
          mod += e.verdict.kind == VerdictKind::Modified;
        }
    rejected_so_far += rej;
    const auto& c = r.stages[k];
    EXPECT_EQ(c.stage, stages[k]);
    EXPECT_EQ(c.in, in);
    EXPECT_EQ(c.rejected, rej);
    EXPECT_EQ(c.kept, kept);
    EXPECT_EQ(c.modified, mod);
    EXPECT_EQ(c.in, c.out() + c.rejected);
    EXPECT_EQ(c.reasons.at("r" + std::to_string(k)), rej);
    EXPECT_DOUBLE_EQ(c.cumulative_yield, static_cast<double>(45 - rejected_so_far) / 45.0);
  }
  const auto csv = to_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "stage,in,kept,modified,rejected,out,cumulative_yield");
  EXPECT_EQ(to_json(r)["stages"].size(), stages.size());
}
