#pragma once

// The document record shared by every stage: classification tags, the
// per-stage audit trail, and the line-delimited JSON encoding.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kcurate/error.hpp"
#include "kcurate/utf8.hpp"

namespace kcurate {

using json = nlohmann::json;

enum class Language { English, Korean, Code, Math, MultiLanguage, Unknown };
enum class Domain { Humanity, STEM, AppliedScience, HealthFood, LifeCulture, ETC };
enum class SourceKind { Organic, Synthetic };
enum class Subsource { Web, Government, Book, News, Paper, Encyclopedia, Others };
enum class Mode { Written, Spoken, Unknown };
enum class Tone { Formal, Informal, Unknown };

inline constexpr std::array<Language, 6> kLanguages{Language::English, Language::Korean,
                                                    Language::Code, Language::Math,
                                                    Language::MultiLanguage, Language::Unknown};
inline constexpr std::array<Domain, 6> kDomains{Domain::Humanity, Domain::STEM,
                                                Domain::AppliedScience, Domain::HealthFood,
                                                Domain::LifeCulture, Domain::ETC};
inline constexpr std::array<Subsource, 7> kSubsources{
    Subsource::Web,   Subsource::Government,   Subsource::Book,  Subsource::News,
    Subsource::Paper, Subsource::Encyclopedia, Subsource::Others};

inline std::string_view to_string(Language v) {
  constexpr std::array<std::string_view, 6> names{"English", "Korean", "Code",
                                                  "Math", "MultiLanguage", "Unknown"};
  return names[static_cast<std::size_t>(v)];
}
inline std::string_view to_string(Domain v) {
  constexpr std::array<std::string_view, 6> names{"Humanity",   "STEM",        "AppliedScience",
                                                  "HealthFood", "LifeCulture", "ETC"};
  return names[static_cast<std::size_t>(v)];
}
inline std::string_view to_string(SourceKind v) {
  return v == SourceKind::Organic ? "Organic" : "Synthetic";
}
inline std::string_view to_string(Subsource v) {
  constexpr std::array<std::string_view, 7> names{"Web",   "Government",   "Book",  "News",
                                                  "Paper", "Encyclopedia", "Others"};
  return names[static_cast<std::size_t>(v)];
}
inline std::string_view to_string(Mode v) {
  constexpr std::array<std::string_view, 3> names{"Written", "Spoken", "Unknown"};
  return names[static_cast<std::size_t>(v)];
}
inline std::string_view to_string(Tone v) {
  constexpr std::array<std::string_view, 3> names{"Formal", "Informal", "Unknown"};
  return names[static_cast<std::size_t>(v)];
}

namespace detail {
template <typename E, std::size_t N>
E parse_enum(std::string_view name, const std::array<E, N>& values, std::string_view what) {
  for (E v : values)
    if (to_string(v) == name) return v;
  fail(ErrorCode::FormatError, "unknown " + std::string(what) + " '" + std::string(name) + "'");
}
}  // namespace detail

inline Language parse_language(std::string_view s) {
  return detail::parse_enum(s, kLanguages, "language");
}
inline Domain parse_domain(std::string_view s) { return detail::parse_enum(s, kDomains, "domain"); }
inline Subsource parse_subsource(std::string_view s) {
  return detail::parse_enum(s, kSubsources, "subsource");
}
inline SourceKind parse_source_kind(std::string_view s) {
  return detail::parse_enum(s, std::array{SourceKind::Organic, SourceKind::Synthetic}, "source");
}
inline Mode parse_mode(std::string_view s) {
  return detail::parse_enum(s, std::array{Mode::Written, Mode::Spoken, Mode::Unknown}, "mode");
}
inline Tone parse_tone(std::string_view s) {
  return detail::parse_enum(s, std::array{Tone::Formal, Tone::Informal, Tone::Unknown}, "tone");
}

struct Source {
  SourceKind kind = SourceKind::Organic;
  std::optional<Subsource> subsource;  // only meaningful for Organic

  static Source organic(Subsource sub) { return {SourceKind::Organic, sub}; }
  static Source synthetic() { return {SourceKind::Synthetic, std::nullopt}; }

  bool operator==(const Source&) const = default;
};

/// Up to five classification attributes; unset attributes are Unknown or
/// empty.
struct TagSet {
  Language language = Language::Unknown;
  std::optional<Source> source;
  std::optional<Domain> domain;
  std::optional<std::string> subdomain;
  Mode mode = Mode::Unknown;
  Tone tone = Tone::Unknown;

  bool operator==(const TagSet&) const = default;
};

/// Maps each mid-level subdomain onto its parent domain.
class SubdomainRegistry {
 public:
  SubdomainRegistry() = default;
  explicit SubdomainRegistry(std::vector<std::pair<std::string, Domain>> entries)
      : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (entries_[i].first == entries_[j].first)
          fail(ErrorCode::ConfigInvalid, "duplicate subdomain '" + entries_[i].first + "'");
  }

  /// Twenty labels. History, Biology, APSC, ARTS and CULT are the published
  /// ones; the rest are plausible fillers and meant to be overridden.
  static SubdomainRegistry defaults() {
    return SubdomainRegistry({
        {"History", Domain::Humanity},        {"Philosophy", Domain::Humanity},
        {"Literature", Domain::Humanity},     {"Law", Domain::Humanity},
        {"Economics", Domain::Humanity},      {"ARTS", Domain::Humanity},
        {"Biology", Domain::STEM},            {"Physics", Domain::STEM},
        {"Chemistry", Domain::STEM},          {"Mathematics", Domain::STEM},
        {"ComputerScience", Domain::STEM},    {"APSC", Domain::AppliedScience},
        {"Engineering", Domain::AppliedScience}, {"Agriculture", Domain::AppliedScience},
        {"Medicine", Domain::HealthFood},     {"Food", Domain::HealthFood},
        {"CULT", Domain::LifeCulture},        {"Sports", Domain::LifeCulture},
        {"General", Domain::ETC},             {"Misc", Domain::ETC},
    });
  }

  static SubdomainRegistry from_json(const json& j) {
    std::vector<std::pair<std::string, Domain>> entries;
    for (const auto& [name, parent] : j.items())
      entries.emplace_back(name, parse_domain(parent.get<std::string>()));
    return SubdomainRegistry(std::move(entries));
  }

  std::optional<Domain> parent_of(std::string_view subdomain) const {
    for (const auto& [name, parent] : entries_)
      if (name == subdomain) return parent;
    return std::nullopt;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
  }

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, Domain>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, Domain>> entries_;
};

enum class Stage {
  Rewrite,
  Refine,
  Dedup,
  Heuristic,
  Perplexity,
  BrokenFix,
  Quality,
  Toxicity,
  LineDedup,
  FinalRefine,
};

/// The eight web-filtering stages in their fixed execution order.
inline constexpr std::array<Stage, 8> kWebStages{Stage::Dedup,      Stage::Heuristic,
                                                 Stage::Perplexity, Stage::BrokenFix,
                                                 Stage::Quality,    Stage::Toxicity,
                                                 Stage::LineDedup,  Stage::FinalRefine};

inline constexpr std::array<Stage, 10> kAllStages{
    Stage::Rewrite,   Stage::Refine,  Stage::Dedup,    Stage::Heuristic, Stage::Perplexity,
    Stage::BrokenFix, Stage::Quality, Stage::Toxicity, Stage::LineDedup, Stage::FinalRefine};

inline std::string_view to_string(Stage s) {
  constexpr std::array<std::string_view, 10> names{
      "rewrite",    "refine",  "dedup",    "heuristic",  "perplexity",
      "broken_fix", "quality", "toxicity", "line_dedup", "final_refine"};
  return names[static_cast<std::size_t>(s)];
}

inline Stage parse_stage(std::string_view s) { return detail::parse_enum(s, kAllStages, "stage"); }

/// Position in processing order. Rewrite and refine both precede the web
/// stages and never occur on the same document.
inline int stage_index(Stage s) {
  switch (s) {
    case Stage::Rewrite:
    case Stage::Refine:
      return 0;
    default:
      return static_cast<int>(s) - 1;
  }
}

enum class VerdictKind { Kept, Rejected, Modified };

inline std::string_view to_string(VerdictKind v) {
  constexpr std::array<std::string_view, 3> names{"kept", "rejected", "modified"};
  return names[static_cast<std::size_t>(v)];
}

struct Verdict {
  VerdictKind kind = VerdictKind::Kept;
  std::string detail;  // rejection reason code or change summary

  static Verdict kept(std::string note = {}) { return {VerdictKind::Kept, std::move(note)}; }
  static Verdict rejected(std::string reason) { return {VerdictKind::Rejected, std::move(reason)}; }
  static Verdict modified(std::string summary) {
    return {VerdictKind::Modified, std::move(summary)};
  }

  bool operator==(const Verdict&) const = default;
};

struct StageEvent {
  Stage stage = Stage::Dedup;
  Verdict verdict;
  std::optional<double> score;

  bool operator==(const StageEvent&) const = default;
};

struct Document {
  std::string id;
  std::string text;
  TagSet tags;
  std::string source_name;
  std::size_t char_count = 0;
  std::vector<StageEvent> audit;
  std::optional<std::string> parent_id;
  json extra = json::object();  // unknown input fields, passed through verbatim

  static Document make(std::string id, std::string text, std::string source_name = "cc") {
    Document d;
    d.id = std::move(id);
    d.source_name = std::move(source_name);
    d.set_text(std::move(text));
    return d;
  }

  void set_text(std::string t) {
    text = std::move(t);
    char_count = utf8::char_count(text);
  }

  bool rejected() const {
    return !audit.empty() && audit.back().verdict.kind == VerdictKind::Rejected;
  }

  /// Appends an event, enforcing append-only ordering and the terminality
  /// of rejections.
  void record(StageEvent event) {
    if (rejected())
      fail(ErrorCode::InvalidDocument, "document '" + id + "' already rejected");
    if (!audit.empty() && stage_index(event.stage) <= stage_index(audit.back().stage))
      fail(ErrorCode::InvalidDocument,
           "audit for '" + id + "' out of order at stage " + std::string(to_string(event.stage)));
    audit.push_back(std::move(event));
  }

  void record(Stage stage, Verdict verdict, std::optional<double> score = std::nullopt) {
    record(StageEvent{stage, std::move(verdict), score});
  }

  bool operator==(const Document&) const = default;
};

/// Result of one per-document stage: the (possibly rewritten) document,
/// the verdict to record, and an optional stage score.
struct StageOutcome {
  Document doc;
  Verdict verdict;
  std::optional<double> score;
};

/// Checks document invariants; DuplicateId is tracked across calls.
class Validator {
 public:
  explicit Validator(SubdomainRegistry registry = SubdomainRegistry::defaults())
      : registry_(std::move(registry)) {}

  const Document& validate(const Document& doc) {
    if (doc.text.empty()) fail(ErrorCode::EmptyText, "document '" + doc.id + "' has empty text");
    if (doc.id.empty()) fail(ErrorCode::InvalidDocument, "document without id");
    if (doc.char_count != utf8::char_count(doc.text))
      fail(ErrorCode::InvalidDocument, "char_count mismatch for '" + doc.id + "'");
    if (doc.tags.subdomain) {
      auto parent = registry_.parent_of(*doc.tags.subdomain);
      if (!parent || (doc.tags.domain && *parent != *doc.tags.domain))
        fail(ErrorCode::OrphanSubdomain,
             "subdomain '" + *doc.tags.subdomain + "' is not under the document's domain");
    }
    for (std::size_t i = 1; i < doc.audit.size(); ++i) {
      if (stage_index(doc.audit[i].stage) <= stage_index(doc.audit[i - 1].stage))
        fail(ErrorCode::InvalidDocument, "audit out of order for '" + doc.id + "'");
      if (doc.audit[i - 1].verdict.kind == VerdictKind::Rejected)
        fail(ErrorCode::InvalidDocument, "event after rejection for '" + doc.id + "'");
    }
    if (!seen_.insert(doc.id).second)
      fail(ErrorCode::DuplicateId, "duplicate id '" + doc.id + "'");
    return doc;
  }

  const SubdomainRegistry& registry() const { return registry_; }

 private:
  SubdomainRegistry registry_;
  std::unordered_set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// JSON encoding. Unset tags are omitted; everything not named here lands in
// Document::extra and is written back untouched.

inline json to_json(const TagSet& t) {
  json j = json::object();
  if (t.language != Language::Unknown) j["language"] = to_string(t.language);
  if (t.source) {
    j["source"] = to_string(t.source->kind);
    if (t.source->subsource) j["subsource"] = to_string(*t.source->subsource);
  }
  if (t.domain) j["domain"] = to_string(*t.domain);
  if (t.subdomain) j["subdomain"] = *t.subdomain;
  if (t.mode != Mode::Unknown) j["mode"] = to_string(t.mode);
  if (t.tone != Tone::Unknown) j["tone"] = to_string(t.tone);
  return j;
}

inline TagSet tags_from_json(const json& j) {
  TagSet t;
  if (!j.is_object()) return t;
  if (auto it = j.find("language"); it != j.end()) t.language = parse_language(it->get<std::string>());
  if (auto it = j.find("source"); it != j.end()) {
    Source s;
    s.kind = parse_source_kind(it->get<std::string>());
    if (auto sub = j.find("subsource"); sub != j.end())
      s.subsource = parse_subsource(sub->get<std::string>());
    t.source = s;
  }
  if (auto it = j.find("domain"); it != j.end()) t.domain = parse_domain(it->get<std::string>());
  if (auto it = j.find("subdomain"); it != j.end()) t.subdomain = it->get<std::string>();
  if (auto it = j.find("mode"); it != j.end()) t.mode = parse_mode(it->get<std::string>());
  if (auto it = j.find("tone"); it != j.end()) t.tone = parse_tone(it->get<std::string>());
  return t;
}

inline json to_json(const StageEvent& e) {
  json j = {{"stage", to_string(e.stage)}, {"verdict", to_string(e.verdict.kind)}};
  if (!e.verdict.detail.empty()) j["detail"] = e.verdict.detail;
  if (e.score) j["score"] = *e.score;
  return j;
}

inline StageEvent event_from_json(const json& j) {
  StageEvent e;
  e.stage = parse_stage(j.at("stage").get<std::string>());
  const std::string v = j.at("verdict").get<std::string>();
  if (v == "kept") e.verdict.kind = VerdictKind::Kept;
  else if (v == "rejected") e.verdict.kind = VerdictKind::Rejected;
  else if (v == "modified") e.verdict.kind = VerdictKind::Modified;
  else fail(ErrorCode::FormatError, "unknown verdict '" + v + "'");
  if (auto it = j.find("detail"); it != j.end()) e.verdict.detail = it->get<std::string>();
  if (auto it = j.find("score"); it != j.end() && !it->is_null()) e.score = it->get<double>();
  return e;
}

inline json to_json(const Document& d) {
  json j = d.extra.is_object() ? d.extra : json::object();
  j["id"] = d.id;
  j["text"] = d.text;
  j["source_name"] = d.source_name;
  j["char_count"] = d.char_count;
  json tags = to_json(d.tags);
  if (!tags.empty()) j["tags"] = std::move(tags);
  if (!d.audit.empty()) {
    json audit = json::array();
    for (const auto& e : d.audit) audit.push_back(to_json(e));
    j["audit"] = std::move(audit);
  }
  if (d.parent_id) j["parent_id"] = *d.parent_id;
  return j;
}

/// Decodes one record. A missing char_count is computed; a present one is
/// kept as-is so Validator can catch producers that disagree.
inline Document document_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::FormatError, "record is not an object");
  Document d;
  try {
    d.id = j.at("id").get<std::string>();
    d.text = j.at("text").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::FormatError, std::string("record missing id/text: ") + e.what());
  }
  d.source_name = j.value("source_name", std::string("cc"));
  if (auto it = j.find("char_count"); it != j.end())
    d.char_count = it->get<std::size_t>();
  else
    d.char_count = utf8::char_count(d.text);
  if (auto it = j.find("tags"); it != j.end()) d.tags = tags_from_json(*it);
  if (auto it = j.find("audit"); it != j.end())
    for (const auto& e : *it) d.audit.push_back(event_from_json(e));
  if (auto it = j.find("parent_id"); it != j.end()) d.parent_id = it->get<std::string>();
  static constexpr std::array<std::string_view, 7> known{
      "id", "text", "source_name", "char_count", "tags", "audit", "parent_id"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) d.extra[key] = value;
  return d;
}

inline std::string to_json_line(const Document& d) {
  return to_json(d).dump(-1, ' ', false, json::error_handler_t::replace);
}

inline Document document_from_json_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::FormatError, std::string("malformed record: ") + e.what());
  }
  return document_from_json(j);
}

}  // namespace kcurate
