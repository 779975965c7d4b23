#pragma once

// Corpus distribution per tag axis and per-stage yield reports rebuilt
// from document audit trails.

#include <algorithm>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kcurate/corpus.hpp"
#include "kcurate/error.hpp"
#include "kcurate/parallel.hpp"
#include "kcurate/route.hpp"
#include "kcurate/tokenizer.hpp"

namespace kcurate {

enum class Axis { Language, Domain, Subdomain, Source, Subsource, Mode, Tone, SourceName };

inline constexpr std::array<Axis, 8> kAxes{Axis::Language, Axis::Domain, Axis::Subdomain, Axis::Source,
                                           Axis::Subsource, Axis::Mode,   Axis::Tone,      Axis::SourceName};

inline std::string_view to_string(Axis a) {
  constexpr std::array<std::string_view, 8> names{"language", "domain", "subdomain", "source",
                                                  "subsource", "mode",  "tone",      "source_name"};
  return names[static_cast<std::size_t>(a)];
}

inline Axis parse_axis(std::string_view s) { return detail::parse_enum(s, kAxes, "axis"); }

inline constexpr std::string_view kUnknownLabel = "unknown";

inline std::string axis_label(const Document& d, Axis a) {
  const TagSet& t = d.tags;
  switch (a) {
    case Axis::Language: return std::string(to_string(t.language));
    case Axis::Domain: return t.domain ? std::string(to_string(*t.domain)) : std::string(kUnknownLabel);
    case Axis::Subdomain: return t.subdomain ? *t.subdomain : std::string(kUnknownLabel);
    case Axis::Source: return t.source ? std::string(to_string(t.source->kind)) : std::string(kUnknownLabel);
    case Axis::Subsource:
      return t.source && t.source->subsource ? std::string(to_string(*t.source->subsource))
                                             : std::string(kUnknownLabel);
    case Axis::Mode: return std::string(to_string(t.mode));
    case Axis::Tone: return std::string(to_string(t.tone));
    case Axis::SourceName: return d.source_name.empty() ? std::string(kUnknownLabel) : d.source_name;
  }
  return std::string(kUnknownLabel);
}

struct DistributionRow {
  std::string label;
  std::size_t docs = 0;
  std::size_t tokens = 0;
  double token_share = 0.0;
  double doc_share = 0.0;
};

/// Rows sorted by label with the unknown row last.
struct Distribution {
  Axis axis = Axis::Language;
  std::vector<DistributionRow> rows;
  std::size_t total_docs = 0;
  std::size_t total_tokens = 0;

  const DistributionRow* find(std::string_view label) const {
    for (const auto& r : rows)
      if (r.label == label) return &r;
    return nullptr;
  }
};

inline Distribution distribution_from_counts(Axis axis, const std::vector<std::string>& labels,
                                             const std::vector<std::size_t>& tokens) {
  Distribution d;
  d.axis = axis;
  std::map<std::string, DistributionRow> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& r = rows[labels[i]];
    r.label = labels[i];
    ++r.docs;
    r.tokens += tokens[i];
    d.total_tokens += tokens[i];
  }
  d.total_docs = labels.size();
  std::optional<DistributionRow> unknown;
  for (auto& [label, r] : rows) {
    r.doc_share = static_cast<double>(r.docs) / static_cast<double>(d.total_docs);
    // With no tokens at all, token shares fall back to document shares.
    r.token_share = d.total_tokens ? static_cast<double>(r.tokens) / static_cast<double>(d.total_tokens) : r.doc_share;
    if (label == kUnknownLabel) unknown = r;
    else d.rows.push_back(r);
  }
  if (unknown) d.rows.push_back(*unknown);
  return d;
}

inline Distribution distribution(std::span<const Document> corpus, Axis axis, const Tokenizer& tokenizer,
                                 unsigned workers = 1) {
  std::vector<std::string> labels(corpus.size());
  std::vector<std::size_t> tokens(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    labels[i] = axis_label(corpus[i], axis);
    tokens[i] = tokenizer.tokenize(corpus[i].text).size();
  });
  return distribution_from_counts(axis, labels, tokens);
}

namespace detail {
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string fmt_share(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}
}  // namespace detail

inline constexpr std::string_view kDistributionCsvHeader = "axis,label,docs,tokens,share";

/// CSV rows; "share" is the token share.
inline std::string to_csv(const Distribution& d, bool header = true) {
  std::string out;
  if (header) out += std::string(kDistributionCsvHeader) + "\n";
  for (const auto& r : d.rows)
    out += std::string(to_string(d.axis)) + "," + detail::csv_field(r.label) + "," + std::to_string(r.docs) + "," +
           std::to_string(r.tokens) + "," + detail::fmt_share(r.token_share) + "\n";
  return out;
}

/// Bar-chart series: labels with both share kinds.
inline json to_json(const Distribution& d) {
  json rows = json::array();
  for (const auto& r : d.rows)
    rows.push_back({{"label", r.label},
                    {"docs", r.docs},
                    {"tokens", r.tokens},
                    {"token_share", r.token_share},
                    {"doc_share", r.doc_share}});
  return json{{"axis", to_string(d.axis)}, {"total_docs", d.total_docs}, {"total_tokens", d.total_tokens},
              {"rows", std::move(rows)}};
}

// ---------------------------------------------------------------------------
// Yield

struct StageCounts {
  Stage stage = Stage::Dedup;
  std::size_t in = 0;
  std::size_t kept = 0;
  std::size_t modified = 0;
  std::size_t rejected = 0;
  std::map<std::string, std::size_t> reasons;
  double cumulative_yield = 0.0;  // share of all inputs not rejected up to here

  std::size_t out() const { return kept + modified; }
  bool operator==(const StageCounts&) const = default;
};

struct YieldReport {
  std::vector<StageCounts> stages;  // canonical stage order
  std::size_t total_in = 0;
  std::size_t survivors = 0;
  double cumulative_yield = 0.0;

  const StageCounts* find(Stage s) const {
    for (const auto& c : stages)
      if (c.stage == s) return &c;
    return nullptr;
  }
};

/// Audit trail must match the document's route exactly, ending early only
/// at a rejection. Rewrite events (synthetic provenance) are ignored.
inline void check_audit(const Document& d, const Route& route) {
  const auto expected = route.stages_for(d);
  std::size_t k = 0;
  for (const auto& e : d.audit) {
    if (e.stage == Stage::Rewrite) continue;
    if (k >= expected.size() || e.stage != expected[k])
      fail(ErrorCode::IncompleteAudit, "'" + d.id + "' has unexpected event '" + std::string(to_string(e.stage)) + "'");
    ++k;
    if (e.verdict.kind == VerdictKind::Rejected) return;
  }
  if (k != expected.size())
    fail(ErrorCode::IncompleteAudit, "'" + d.id + "' is missing stage '" + std::string(to_string(expected[k])) + "'");
}

/// Incremental form of yield_report for streamed runs.
class YieldAccumulator {
 public:
  explicit YieldAccumulator(Route route = {}) : route_(std::move(route)) {}

  void add(const Document& d) {
    check_audit(d, route_);
    ++total_;
    for (const auto& e : d.audit) {
      auto& c = by_stage_[e.stage == Stage::Rewrite ? -1 : stage_index(e.stage)];
      c.stage = e.stage;
      ++c.in;
      switch (e.verdict.kind) {
        case VerdictKind::Kept: ++c.kept; break;
        case VerdictKind::Modified: ++c.modified; break;
        case VerdictKind::Rejected:
          ++c.rejected;
          ++c.reasons[e.verdict.detail];
          break;
      }
    }
    if (!d.rejected()) ++survivors_;
  }

  YieldReport report() const {
    YieldReport r;
    r.total_in = total_;
    r.survivors = survivors_;
    std::size_t rejected_so_far = 0;
    for (auto [_, c] : by_stage_) {
      rejected_so_far += c.rejected;
      c.cumulative_yield = total_ ? static_cast<double>(total_ - rejected_so_far) / total_ : 0.0;
      r.stages.push_back(c);
    }
    r.cumulative_yield = total_ ? static_cast<double>(survivors_) / total_ : 0.0;
    return r;
  }

 private:
  Route route_;
  std::map<int, StageCounts> by_stage_;  // Rewrite sorts before Refine
  std::size_t total_ = 0;
  std::size_t survivors_ = 0;
};

inline YieldReport yield_report(std::span<const Document> run, const Route& route = {}) {
  YieldAccumulator acc(route);
  for (const auto& d : run) acc.add(d);
  return acc.report();
}

inline json to_json(const StageCounts& c) {
  return json{{"stage", to_string(c.stage)}, {"in", c.in},           {"kept", c.kept},
              {"modified", c.modified},      {"rejected", c.rejected}, {"out", c.out()},
              {"reasons", c.reasons},        {"cumulative_yield", c.cumulative_yield}};
}

inline json to_json(const YieldReport& r) {
  json stages = json::array();
  for (const auto& c : r.stages) stages.push_back(to_json(c));
  return json{{"total_in", r.total_in},
              {"survivors", r.survivors},
              {"cumulative_yield", r.cumulative_yield},
              {"stages", std::move(stages)}};
}

inline std::string to_csv(const YieldReport& r) {
  std::string out = "stage,in,kept,modified,rejected,out,cumulative_yield\n";
  for (const auto& c : r.stages)
    out += std::string(to_string(c.stage)) + "," + std::to_string(c.in) + "," + std::to_string(c.kept) + "," +
           std::to_string(c.modified) + "," + std::to_string(c.rejected) + "," + std::to_string(c.out()) + "," +
           detail::fmt_share(c.cumulative_yield) + "\n";
  return out;
}

}  // namespace kcurate
