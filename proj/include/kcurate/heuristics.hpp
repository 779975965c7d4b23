#pragma once

// Rule-based stages: heuristic rejection/stripping, repair of broken
// Unicode (replacement characters, mojibake, decomposed jamo), and the
// final normalization pass with PII redaction.

#include <unicode/ucnv.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kcurate/corpus.hpp"
#include "kcurate/error.hpp"
#include "kcurate/regex.hpp"
#include "kcurate/utf8.hpp"

namespace kcurate {

// ---------------------------------------------------------------------------
// Heuristic filter

enum class RuleMetric { HashtagDensity, EllipsisRun, PunctuationRatio, MinChars, Pattern };
enum class RuleAction { Reject, Strip };

inline std::string_view to_string(RuleMetric m) {
  constexpr std::array<std::string_view, 5> names{"hashtag_density", "ellipsis_run",
                                                  "punctuation_ratio", "min_chars", "pattern"};
  return names[static_cast<std::size_t>(m)];
}

inline RuleMetric parse_rule_metric(std::string_view s) {
  for (auto m : {RuleMetric::HashtagDensity, RuleMetric::EllipsisRun, RuleMetric::PunctuationRatio,
                 RuleMetric::MinChars, RuleMetric::Pattern})
    if (to_string(m) == s) return m;
  fail(ErrorCode::ConfigInvalid, "unknown rule metric '" + std::string(s) + "'");
}

struct HeuristicRule {
  std::string name;
  RuleMetric metric = RuleMetric::Pattern;
  double threshold = 0.0;
  RuleAction action = RuleAction::Reject;
  Regex pattern;  // Pattern metric only
};

/// Fraction of whitespace-delimited tokens that are hashtags.
inline double hashtag_density(std::u32string_view text) {
  std::size_t tokens = 0, tags = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && utf8::is_whitespace(text[i])) ++i;
    if (i >= text.size()) break;
    const std::size_t start = i;
    while (i < text.size() && !utf8::is_whitespace(text[i])) ++i;
    ++tokens;
    const char32_t first = text[start];
    if ((first == U'#' || first == 0xFF03) && i - start > 1) ++tags;
  }
  return tokens ? static_cast<double>(tags) / tokens : 0.0;
}

/// Longest run of ellipsis dots; '…' and '⋯' count as three.
inline double max_ellipsis_run(std::u32string_view text) {
  std::size_t best = 0, run = 0;
  for (char32_t c : text) {
    if (c == U'.') run += 1;
    else if (c == 0x2026 || c == 0x22EF) run += 3;
    else run = 0;
    best = std::max(best, run);
  }
  return static_cast<double>(best);
}

/// Punctuation and symbols over all non-space characters.
inline double punctuation_ratio(std::u32string_view text) {
  std::size_t nonspace = 0, punct = 0;
  for (char32_t c : text) {
    if (utf8::is_whitespace(c)) continue;
    ++nonspace;
    if (utf8::is_punct_or_symbol(c)) ++punct;
  }
  return nonspace ? static_cast<double>(punct) / nonspace : 0.0;
}

class HeuristicRuleSet {
 public:
  HeuristicRuleSet() = default;
  explicit HeuristicRuleSet(std::vector<HeuristicRule> rules) : rules_(std::move(rules)) {
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      if (!std::isfinite(rules_[i].threshold))
        fail(ErrorCode::ConfigInvalid, "rule '" + rules_[i].name + "' has a non-finite threshold");
      if (rules_[i].metric == RuleMetric::Pattern && !rules_[i].pattern.valid())
        fail(ErrorCode::ConfigInvalid, "rule '" + rules_[i].name + "' needs a pattern");
      if (rules_[i].action == RuleAction::Strip && rules_[i].metric != RuleMetric::Pattern)
        fail(ErrorCode::ConfigInvalid, "strip rule '" + rules_[i].name + "' needs a pattern");
      for (std::size_t j = 0; j < i; ++j)
        if (rules_[i].name == rules_[j].name)
          fail(ErrorCode::ConfigInvalid, "duplicate rule name '" + rules_[i].name + "'");
    }
  }

  static HeuristicRuleSet defaults() {
    return HeuristicRuleSet({
        {"hashtag_density", RuleMetric::HashtagDensity, 0.3, RuleAction::Reject, {}},
        {"excessive_ellipsis", RuleMetric::EllipsisRun, 5, RuleAction::Reject, {}},
        {"abnormal_punctuation", RuleMetric::PunctuationRatio, 0.4, RuleAction::Reject, {}},
        {"strip_hashtags", RuleMetric::Pattern, 0, RuleAction::Strip,
         Regex("[#\\x{FF03}][^\\s#\\x{FF03}]+")},
    });
  }

  /// {"rules": [{"name", "metric", "threshold", "action", "pattern"}]}
  static HeuristicRuleSet from_json(const json& j) {
    std::vector<HeuristicRule> rules;
    for (const auto& r : j.at("rules")) {
      HeuristicRule rule;
      rule.name = r.at("name").get<std::string>();
      rule.metric = parse_rule_metric(r.value("metric", std::string("pattern")));
      rule.threshold = r.value("threshold", 0.0);
      const std::string action = r.value("action", std::string("reject"));
      if (action == "reject") rule.action = RuleAction::Reject;
      else if (action == "strip") rule.action = RuleAction::Strip;
      else fail(ErrorCode::ConfigInvalid, "unknown rule action '" + action + "'");
      if (r.contains("pattern")) rule.pattern = Regex(r.at("pattern").get<std::string>());
      rules.push_back(std::move(rule));
    }
    return HeuristicRuleSet(std::move(rules));
  }

  const std::vector<HeuristicRule>& rules() const { return rules_; }

 private:
  std::vector<HeuristicRule> rules_;
};

/// Evaluates rules in order; metrics see the NFC form. The first firing
/// Reject rule decides. Strip rules edit the stored text (not its NFC form,
/// which may be longer) and later rules see the result.
inline StageOutcome heuristic_filter(Document doc, const HeuristicRuleSet& rules) {
  std::string text = doc.text;
  std::vector<std::string> stripped;
  for (const auto& rule : rules.rules()) {
    if (rule.action == RuleAction::Strip) {
      std::size_t hits = 0;
      std::string next = rule.pattern.replace_all(text, "", &hits);
      if (hits) {
        static const Regex spaces("[ \\t]{2,}");
        static const Regex trailing("(?m)[ \\t]+$");
        next = trailing.replace_all(spaces.replace_all(next, " "), "");
        text = std::move(next);
        stripped.push_back(rule.name);
      }
      continue;
    }
    const std::string normalized = utf8::nfc(text);
    const std::u32string cps = utf8::decode(normalized);
    double value = 0.0;
    bool fires = false;
    switch (rule.metric) {
      case RuleMetric::HashtagDensity:
        value = hashtag_density(cps);
        fires = value >= rule.threshold;
        break;
      case RuleMetric::EllipsisRun:
        value = max_ellipsis_run(cps);
        fires = value >= rule.threshold;
        break;
      case RuleMetric::PunctuationRatio:
        value = punctuation_ratio(cps);
        fires = value >= rule.threshold;
        break;
      case RuleMetric::MinChars:
        value = static_cast<double>(cps.size());
        fires = value < rule.threshold;
        break;
      case RuleMetric::Pattern:
        value = static_cast<double>(rule.pattern.count(normalized));
        fires = value >= std::max(1.0, rule.threshold);
        break;
    }
    if (fires) return {std::move(doc), Verdict::rejected(rule.name), value};
  }
  if (stripped.empty()) return {std::move(doc), Verdict::kept(), std::nullopt};
  std::string summary = "stripped:";
  for (std::size_t i = 0; i < stripped.size(); ++i) summary += (i ? "," : "") + stripped[i];
  doc.set_text(std::move(text));
  return {std::move(doc), Verdict::modified(summary), std::nullopt};
}

// ---------------------------------------------------------------------------
// Broken document detection and correction

struct BrokenTextConfig {
  double max_replacement_density = 0.005;
  std::size_t max_conjoining_jamo_run = 3;  // residual decomposed jamo tolerated
  std::size_t max_mojibake_residue = 0;     // unrepairable signatures tolerated
};

struct BrokenTextMetrics {
  double replacement_density = 0.0;
  std::size_t isolated_jamo_run = 0;
  std::size_t mojibake_repaired = 0;
  std::size_t mojibake_residue = 0;
};

namespace detail {

/// Byte value a character would have had under a Latin-1/CP1252 misdecode.
inline std::optional<std::uint8_t> cp1252_byte(char32_t c) {
  if (c >= 0x80 && c <= 0xFF) return static_cast<std::uint8_t>(c);
  switch (c) {
    case 0x20AC: return 0x80; case 0x201A: return 0x82; case 0x0192: return 0x83;
    case 0x201E: return 0x84; case 0x2026: return 0x85; case 0x2020: return 0x86;
    case 0x2021: return 0x87; case 0x02C6: return 0x88; case 0x2030: return 0x89;
    case 0x0160: return 0x8A; case 0x2039: return 0x8B; case 0x0152: return 0x8C;
    case 0x017D: return 0x8E; case 0x2018: return 0x91; case 0x2019: return 0x92;
    case 0x201C: return 0x93; case 0x201D: return 0x94; case 0x2022: return 0x95;
    case 0x2013: return 0x96; case 0x2014: return 0x97; case 0x02DC: return 0x98;
    case 0x2122: return 0x99; case 0x0161: return 0x9A; case 0x203A: return 0x9B;
    case 0x0153: return 0x9C; case 0x017E: return 0x9E; case 0x0178: return 0x9F;
    default: return std::nullopt;
  }
}

inline bool is_continuation(char32_t c) {
  auto b = cp1252_byte(c);
  return b && *b >= 0x80 && *b <= 0xBF;
}

inline int utf8_length_for_lead(std::uint8_t b) {
  if (b >= 0xC2 && b <= 0xDF) return 2;
  if (b >= 0xE0 && b <= 0xEF) return 3;
  if (b >= 0xF0 && b <= 0xF4) return 4;
  return 0;
}

/// Repairs UTF-8 that was decoded as CP1252/Latin-1 ("ì•ˆë…•" → "안녕").
/// Counts repaired sequences and lead+continuation fragments that could not
/// be decoded.
inline std::u32string repair_utf8_mojibake(std::u32string_view in, std::size_t& repaired,
                                           std::size_t& residue) {
  std::u32string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    const auto lead = cp1252_byte(in[i]);
    const int len = lead ? utf8_length_for_lead(*lead) : 0;
    if (len == 0) {
      out.push_back(in[i++]);
      continue;
    }
    std::string bytes(1, static_cast<char>(*lead));
    std::size_t j = i + 1;
    while (j < in.size() && static_cast<int>(bytes.size()) < len && is_continuation(in[j])) {
      bytes.push_back(static_cast<char>(*cp1252_byte(in[j])));
      ++j;
    }
    if (static_cast<int>(bytes.size()) == len) {
      const std::u32string decoded = utf8::decode(bytes);
      if (decoded.size() == 1 && decoded[0] != utf8::kReplacement) {
        out.push_back(decoded[0]);
        ++repaired;
        i = j;
        continue;
      }
    }
    if (bytes.size() >= 2) ++residue;
    out.push_back(in[i++]);
  }
  return out;
}

inline bool is_euckr_lead(char32_t c) { return c >= 0xB0 && c <= 0xC8; }
inline bool is_euckr_trail(char32_t c) { return c >= 0xA1 && c <= 0xFE; }

inline bool euckr_shaped(std::u32string_view run) {
  if (run.size() % 2) return false;
  for (std::size_t k = 0; k < run.size(); k += 2)
    if (!is_euckr_lead(run[k]) || !is_euckr_trail(run[k + 1])) return false;
  return true;
}

/// Strict decode; nullopt unless every byte is consumed into a syllable.
inline std::optional<std::u32string> decode_euckr_hangul(std::u32string_view run) {
  std::string bytes;
  for (char32_t c : run) bytes.push_back(static_cast<char>(c));
  UErrorCode status = U_ZERO_ERROR;
  UConverter* conv = ucnv_open("EUC-KR", &status);
  if (U_FAILURE(status)) return std::nullopt;
  std::u16string buf(bytes.size() + 1, u'\0');
  ucnv_setToUCallBack(conv, UCNV_TO_U_CALLBACK_STOP, nullptr, nullptr, nullptr, &status);
  const int32_t n = ucnv_toUChars(conv, reinterpret_cast<UChar*>(buf.data()), static_cast<int32_t>(buf.size()),
                                  bytes.data(), static_cast<int32_t>(bytes.size()), &status);
  ucnv_close(conv);
  if (U_FAILURE(status) || n * 2 != static_cast<int32_t>(run.size())) return std::nullopt;
  std::u32string out;
  for (int32_t k = 0; k < n; ++k) {
    if (!utf8::is_hangul_syllable(buf[static_cast<std::size_t>(k)])) return std::nullopt;
    out.push_back(buf[static_cast<std::size_t>(k)]);
  }
  return out;
}

/// Strict UTF-8 decode of a run of misdecoded bytes.
inline std::optional<std::u32string> decode_utf8_run(std::u32string_view run) {
  std::string bytes;
  for (char32_t c : run) bytes.push_back(static_cast<char>(*cp1252_byte(c)));
  std::u32string out = utf8::decode(bytes);
  if (out.empty() || std::find(out.begin(), out.end(), utf8::kReplacement) != out.end()) return std::nullopt;
  return out;
}

/// Repairs text whose bytes were decoded as CP1252/Latin-1. Works on maximal
/// runs of characters that map back to a single byte: a run that is valid
/// UTF-8 as a whole is decoded as UTF-8 ("ì•ˆë…•" → "안녕"); a run made of
/// EUC-KR Hangul pairs is decoded as EUC-KR ("°¡³ª" → "가나") when the
/// document holds at least two such pairs; anything else gets the
/// per-sequence UTF-8 repair.
inline std::u32string repair_mojibake(std::u32string_view in, std::size_t& repaired, std::size_t& residue) {
  struct Run {
    std::size_t begin, end;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < in.size();) {
    if (!cp1252_byte(in[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < in.size() && cp1252_byte(in[j])) ++j;
    runs.push_back({i, j});
    i = j;
  }
  std::size_t euckr_pairs = 0;
  for (const auto& r : runs) {
    const auto run = in.substr(r.begin, r.end - r.begin);
    if (run.size() >= 2 && !decode_utf8_run(run) && euckr_shaped(run)) euckr_pairs += run.size() / 2;
  }
  std::u32string out;
  out.reserve(in.size());
  std::size_t pos = 0;
  for (const auto& r : runs) {
    out.append(in.substr(pos, r.begin - pos));
    pos = r.end;
    const auto run = in.substr(r.begin, r.end - r.begin);
    if (run.size() >= 2) {
      if (auto d = decode_utf8_run(run)) {
        out += *d;
        repaired += d->size();
        continue;
      }
      if (euckr_pairs >= 2 && euckr_shaped(run)) {
        if (auto d = decode_euckr_hangul(run)) {
          out += *d;
          repaired += d->size();
        } else {
          ++residue;
          out.append(run);
        }
        continue;
      }
    }
    out += repair_utf8_mojibake(run, repaired, residue);
  }
  out.append(in.substr(std::min(pos, in.size())));
  return out;
}

inline std::size_t longest_conjoining_jamo_run(std::u32string_view t) {
  std::size_t best = 0, run = 0;
  for (char32_t c : t) {
    run = utf8::is_conjoining_jamo(c) ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

inline std::size_t longest_isolated_jamo_run(std::u32string_view t) {
  std::size_t best = 0, run = 0;
  for (char32_t c : t) {
    run = (utf8::is_conjoining_jamo(c) || utf8::is_compat_jamo(c)) ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

}  // namespace detail

struct BrokenTextResult {
  std::string text;
  BrokenTextMetrics metrics;
  std::optional<std::string> irrecoverable;  // reason when rejected
};

/// Repairs mojibake to a fixed point, rejects on replacement-character
/// density, strips the remaining U+FFFD, recomposes compatibility jamo and
/// applies NFC. Residual signatures make the document irrecoverable.
inline BrokenTextResult repair_broken_text(std::string_view text,
                                           const BrokenTextConfig& cfg = {}) {
  BrokenTextResult r;
  std::u32string t = utf8::decode(utf8::nfc(text));
  std::size_t residue = 0;
  for (int pass = 0; pass < 4; ++pass) {
    std::size_t repaired = 0;
    residue = 0;
    t = detail::repair_mojibake(t, repaired, residue);
    r.metrics.mojibake_repaired += repaired;
    if (repaired == 0) break;
  }
  r.metrics.mojibake_residue = residue;

  std::size_t fffd = 0;
  for (char32_t c : t) fffd += c == utf8::kReplacement;
  r.metrics.replacement_density = t.empty() ? 0.0 : static_cast<double>(fffd) / t.size();
  if (fffd > 0 && r.metrics.replacement_density >= cfg.max_replacement_density) {
    r.irrecoverable = "irrecoverable:replacement_density";
    r.text = std::string(text);
    return r;
  }
  std::erase(t, utf8::kReplacement);
  r.metrics.isolated_jamo_run = detail::longest_isolated_jamo_run(t);
  t = utf8::decode(utf8::nfc(utf8::encode(utf8::recompose_compat_jamo(t))));
  r.text = utf8::encode(t);
  if (r.metrics.mojibake_residue > cfg.max_mojibake_residue)
    r.irrecoverable = "irrecoverable:mojibake";
  else if (detail::longest_conjoining_jamo_run(t) >= cfg.max_conjoining_jamo_run &&
           cfg.max_conjoining_jamo_run > 0)
    r.irrecoverable = "irrecoverable:broken_jamo";
  return r;
}

inline StageOutcome fix_broken(Document doc, const BrokenTextConfig& cfg = {}) {
  BrokenTextResult r = repair_broken_text(doc.text, cfg);
  if (r.irrecoverable)
    return {std::move(doc), Verdict::rejected(*r.irrecoverable), r.metrics.replacement_density};
  if (r.text == doc.text) return {std::move(doc), Verdict::kept(), r.metrics.replacement_density};
  std::string summary = "repaired";
  if (r.metrics.mojibake_repaired)
    summary += " mojibake=" + std::to_string(r.metrics.mojibake_repaired);
  doc.set_text(std::move(r.text));
  return {std::move(doc), Verdict::modified(summary), r.metrics.replacement_density};
}

// ---------------------------------------------------------------------------
// PII

struct PiiPattern {
  std::string name;
  Regex pattern;
  std::string replacement;
};

class PiiPatternSet {
 public:
  PiiPatternSet() = default;
  explicit PiiPatternSet(std::vector<PiiPattern> patterns) : patterns_(std::move(patterns)) {
    for (const auto& p : patterns_) {
      if (!p.pattern.valid()) fail(ErrorCode::ConfigInvalid, "PII pattern '" + p.name + "' empty");
      if (std::any_of(p.replacement.begin(), p.replacement.end(),
                      [](char c) { return c >= '0' && c <= '9'; }))
        fail(ErrorCode::ConfigInvalid, "PII replacement for '" + p.name + "' contains digits");
    }
  }

  /// Order matters: credentials and e-mail before the digit patterns, and
  /// registration numbers before phone numbers.
  static PiiPatternSet defaults() {
    return PiiPatternSet({
        {"url_credentials", Regex("[A-Za-z][A-Za-z0-9+.\\-]*://[^\\s/:@]+:[^\\s/@]+@"),
         "⟨CREDENTIALS⟩"},
        {"email", Regex("[A-Za-z0-9._%+\\-]+@[A-Za-z0-9.\\-]+\\.[A-Za-z]{2,}"),
         "⟨EMAIL⟩"},
        {"resident_registration_number", Regex("(?<![0-9])[0-9]{6}-[1-8][0-9]{6}(?![0-9])"),
         "⟨RRN⟩"},
        {"korean_phone",
         Regex("(?<![0-9])(?:\\+82[-. ]?|0)(?:1[016789]|2|[3-6][1-5]|70|80)[-. )]?[0-9]{3,4}"
               "[-. ]?[0-9]{4}(?![0-9])"),
         "⟨PHONE⟩"},
    });
  }

  /// {"patterns": [{"name", "regex", "replacement"}]}
  static PiiPatternSet from_json(const json& j) {
    std::vector<PiiPattern> out;
    for (const auto& p : j.at("patterns"))
      out.push_back({p.at("name").get<std::string>(), Regex(p.at("regex").get<std::string>()),
                     p.at("replacement").get<std::string>()});
    return PiiPatternSet(std::move(out));
  }

  const std::vector<PiiPattern>& patterns() const { return patterns_; }

  std::size_t count_matches(std::string_view text) const {
    std::size_t n = 0;
    for (const auto& p : patterns_) n += p.pattern.count(text);
    return n;
  }

  /// Replaces matches until none remain; per-pattern counts go to `counts`.
  std::string redact(std::string_view text, std::map<std::string, std::size_t>* counts = nullptr) const {
    std::string out(text);
    for (int pass = 0; pass < 8; ++pass) {
      std::size_t total = 0;
      for (const auto& p : patterns_) {
        std::size_t hits = 0;
        out = p.pattern.replace_all(out, p.replacement, &hits);
        if (hits && counts) (*counts)[p.name] += hits;
        total += hits;
      }
      if (total == 0) break;
    }
    return out;
  }

 private:
  std::vector<PiiPattern> patterns_;
};

// ---------------------------------------------------------------------------
// Final refinement

struct FinalRefineConfig {
  bool fullwidth_to_halfwidth = true;
  PiiPatternSet pii = PiiPatternSet::defaults();
};

inline bool is_invisible(char32_t c) {
  return (c >= 0x200B && c <= 0x200D) || c == 0x2060 || c == 0xFEFF;
}

struct FinalRefineResult {
  std::string text;
  std::size_t invisible_removed = 0;
  std::size_t fullwidth_converted = 0;
  std::map<std::string, std::size_t> redactions;
};

/// Removes zero-width characters, applies NFC, folds full-width ASCII
/// forms (U+FF01–U+FF5E) to ASCII when configured, then redacts PII.
inline FinalRefineResult final_refine_text(std::string_view text, const FinalRefineConfig& cfg = {}) {
  FinalRefineResult r;
  std::u32string t = utf8::decode(text);
  std::u32string out;
  out.reserve(t.size());
  for (char32_t c : t) {
    if (is_invisible(c)) {
      ++r.invisible_removed;
      continue;
    }
    if (cfg.fullwidth_to_halfwidth && c >= 0xFF01 && c <= 0xFF5E) {
      out.push_back(c - 0xFEE0);
      ++r.fullwidth_converted;
      continue;
    }
    out.push_back(c);
  }
  r.text = cfg.pii.redact(utf8::nfc(utf8::encode(out)), &r.redactions);
  return r;
}

inline StageOutcome final_refine(Document doc, const FinalRefineConfig& cfg = {}) {
  FinalRefineResult r = final_refine_text(doc.text, cfg);
  if (r.text == doc.text) return {std::move(doc), Verdict::kept(), std::nullopt};
  std::string summary;
  if (r.invisible_removed) summary += "invisible=" + std::to_string(r.invisible_removed) + ";";
  if (r.fullwidth_converted) summary += "fullwidth=" + std::to_string(r.fullwidth_converted) + ";";
  for (const auto& [name, n] : r.redactions) summary += "pii:" + name + "=" + std::to_string(n) + ";";
  if (summary.empty()) summary = "normalized";
  else summary.pop_back();
  doc.set_text(std::move(r.text));
  return {std::move(doc), Verdict::modified(summary), std::nullopt};
}

}  // namespace kcurate
