#pragma once

// Source-specific refiners for non-web corpora, dispatched by source name.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kcurate/corpus.hpp"
#include "kcurate/error.hpp"
#include "kcurate/regex.hpp"
#include "kcurate/text.hpp"
#include "kcurate/utf8.hpp"

namespace kcurate {

// ---------------------------------------------------------------------------
// News

struct NewsRefinerConfig {
  std::vector<std::string> headline_markers{"[속보]", "[상보]", "(상보)"};
  std::vector<std::string> leading_tokens{"상보"};
  Regex byline{
      "(?:^|(?<=[\\s.!?\"'”’)]))[가-힣]{2,4}[ \\t]?기자"
      "(?:[ \\t]*[A-Za-z0-9._%+\\-]+@[A-Za-z0-9.\\-]+\\.[A-Za-z]{2,})?[ \\t]*$"};
  std::vector<std::string> caption_markers{"사진=", "(사진)"};
  std::size_t caption_max_chars = 40;

  static NewsRefinerConfig from_json(const json& j) {
    NewsRefinerConfig c;
    if (j.contains("headline_markers")) c.headline_markers = j["headline_markers"].get<std::vector<std::string>>();
    if (j.contains("leading_tokens")) c.leading_tokens = j["leading_tokens"].get<std::vector<std::string>>();
    if (j.contains("byline")) c.byline = Regex(j["byline"].get<std::string>());
    if (j.contains("caption_markers")) c.caption_markers = j["caption_markers"].get<std::vector<std::string>>();
    c.caption_max_chars = j.value("caption_max_chars", c.caption_max_chars);
    return c;
  }
};

/// Strips breaking-news markers from the headline (first non-blank line),
/// drops short photo-caption lines and removes a trailing reporter byline.
inline std::string refine_news_text(std::string_view text, const NewsRefinerConfig& cfg = {}) {
  std::vector<std::string> lines = detail::split_lines(text);

  auto head = std::find_if(lines.begin(), lines.end(), [](const std::string& l) { return !detail::is_blank(l); });
  if (head != lines.end()) {
    std::string h = *head;
    bool changed = false;
    for (const auto& m : cfg.headline_markers) {
      if (h.find(m) != std::string::npos) {
        detail::replace_all_literal(h, m, " ");
        changed = true;
      }
    }
    for (bool again = true; again;) {
      again = false;
      const std::string t = detail::trim(h);
      for (const auto& tok : cfg.leading_tokens) {
        if (t.size() > tok.size() && t.compare(0, tok.size(), tok) == 0 &&
            (t[tok.size()] == ' ' || t[tok.size()] == '\t')) {
          h = t.substr(tok.size());
          changed = again = true;
        } else if (t == tok) {
          h.clear();
          changed = true;
        }
      }
    }
    if (changed) *head = utf8::collapse_whitespace(h);
  }

  std::vector<std::string> kept;
  kept.reserve(lines.size());
  for (auto& l : lines) {
    bool caption = false;
    if (utf8::char_count(l) < cfg.caption_max_chars)
      for (const auto& m : cfg.caption_markers) caption = caption || l.find(m) != std::string::npos;
    if (!caption) kept.push_back(std::move(l));
  }

  while (!kept.empty() && detail::is_blank(kept.back())) kept.pop_back();
  if (!kept.empty() && cfg.byline.valid()) {
    std::size_t hits = 0;
    std::string last = cfg.byline.replace_all(kept.back(), "", &hits);
    if (hits) {
      last = detail::trim(last);
      if (last.empty()) kept.pop_back();
      else kept.back() = std::move(last);
      while (!kept.empty() && detail::is_blank(kept.back())) kept.pop_back();
    }
  }
  while (!kept.empty() && detail::is_blank(kept.front())) kept.erase(kept.begin());
  return detail::join_lines(kept);
}

// ---------------------------------------------------------------------------
// Court judgments

struct JudgmentRefinerConfig {
  /// Header text (after removing spaces, brackets and enumerators) → section.
  std::vector<std::pair<std::string, std::string>> skeleton{
      {"주문", "ruling"}, {"청구취지", "claims"}, {"청구원인", "claims"}, {"이유", "reasoning"}};
  /// Lines that close the current section: exact keys, and short
  /// signature lines starting with a prefix ("판사 홍길동").
  std::vector<std::string> stop_headers{"사건", "원고", "피고", "판결선고", "변론종결", "당사자"};
  std::vector<std::string> signature_prefixes{"판사", "재판장"};
  std::vector<std::pair<std::string, std::string>> roles{{"원고", "⟨원고⟩"}, {"피고", "⟨피고⟩"}};

  static JudgmentRefinerConfig from_json(const json& j) {
    JudgmentRefinerConfig c;
    if (j.contains("skeleton")) {
      c.skeleton.clear();
      for (auto& [k, v] : j["skeleton"].items()) c.skeleton.emplace_back(k, v.get<std::string>());
    }
    if (j.contains("stop_headers")) c.stop_headers = j["stop_headers"].get<std::vector<std::string>>();
    if (j.contains("signature_prefixes"))
      c.signature_prefixes = j["signature_prefixes"].get<std::vector<std::string>>();
    if (j.contains("roles")) {
      c.roles.clear();
      for (auto& [k, v] : j["roles"].items()) c.roles.emplace_back(k, v.get<std::string>());
    }
    return c;
  }
};

struct JudgmentSection {
  std::string name;  // claims | reasoning | ruling
  std::string header;
  std::vector<std::string> body;
};

namespace detail {

/// Header key: drop whitespace, brackets, colons and a leading enumerator
/// such as "1.".
inline std::string header_key(std::string_view line) {
  std::u32string out;
  for (char32_t c : utf8::decode(line)) {
    if (utf8::is_whitespace(c)) continue;
    switch (c) {
      case U'[': case U']': case U'(': case U')': case 0x3010: case 0x3011: case U'<': case U'>':
      case 0x300C: case 0x300D: case U':': case 0xFF1A:
        continue;
      default:
        out.push_back(c);
    }
  }
  std::size_t i = 0;
  while (i < out.size() && (utf8::is_ascii_digit(out[i]) || out[i] == U'.')) ++i;
  if (i > 0 && i < out.size()) out.erase(0, i);
  return utf8::encode(out);
}

}  // namespace detail

/// Sections in document order plus the party alias table read from the
/// preamble (lines before the first skeleton header).
struct ParsedJudgment {
  std::vector<JudgmentSection> sections;
  std::vector<std::pair<std::string, std::string>> aliases;  // name → role token
};

inline ParsedJudgment parse_judgment(std::string_view text, const JudgmentRefinerConfig& cfg = {}) {
  ParsedJudgment out;
  std::vector<std::pair<Regex, std::string>> party;
  for (const auto& [role, token] : cfg.roles)
    party.emplace_back(Regex("^\\s*[\\[\\x{3010}(]?" + role +
                             "[\\]\\x{3011})]?[\\s:\\x{FF1A}]*([가-힣]{2,4})(?=\\s|$|\\(|,)"),
                       token);
  auto ends_section = [&](const std::string& key) {
    for (const auto& s : cfg.stop_headers)
      if (key == s) return true;
    for (const auto& s : cfg.signature_prefixes)
      if (key.rfind(s, 0) == 0 && utf8::char_count(key) <= utf8::char_count(s) + 4) return true;
    return false;
  };

  std::optional<JudgmentSection> current;
  bool preamble = true;
  for (const auto& line : detail::split_lines(text)) {
    const std::string key = detail::header_key(line);
    auto sk = std::find_if(cfg.skeleton.begin(), cfg.skeleton.end(),
                           [&](const auto& p) { return p.first == key; });
    if (sk != cfg.skeleton.end()) {
      if (current) out.sections.push_back(std::move(*current));
      current = JudgmentSection{sk->second, detail::trim(line), {}};
      preamble = false;
      continue;
    }
    if (preamble) {
      for (const auto& [re, token] : party) {
        std::string name = re.first_group(line, 1);
        if (!name.empty()) out.aliases.emplace_back(std::move(name), token);
      }
      continue;
    }
    if (!current) continue;
    if (ends_section(key)) {
      out.sections.push_back(std::move(*current));
      current.reset();
      continue;
    }
    current->body.push_back(line);
  }
  if (current) out.sections.push_back(std::move(*current));
  std::stable_sort(out.aliases.begin(), out.aliases.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  return out;
}

inline std::string refine_judgment_text(std::string_view text, const JudgmentRefinerConfig& cfg = {}) {
  ParsedJudgment p = parse_judgment(text, cfg);
  if (p.sections.empty()) fail(ErrorCode::MissingSkeleton, "no judgment section headers found");
  std::vector<std::string> lines;
  for (const auto& s : p.sections) {
    lines.push_back(s.header);
    for (const auto& l : s.body) lines.push_back(l);
  }
  while (!lines.empty() && detail::is_blank(lines.back())) lines.pop_back();
  const std::string extracted = detail::join_lines(lines);
  std::string out = extracted;
  for (const auto& [name, token] : p.aliases) detail::replace_all_literal(out, name, token);
  if (utf8::char_count(out) <= utf8::char_count(text)) return out;
  // bracketed tokens outgrew the input: mask with the bare role word, which
  // is never longer than a matched name under the default roles
  out = extracted;
  for (const auto& [name, token] : p.aliases) {
    auto role = std::find_if(cfg.roles.begin(), cfg.roles.end(), [&](const auto& r) { return r.second == token; });
    detail::replace_all_literal(out, name, role != cfg.roles.end() ? role->first : token);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generic pattern refiner: drop matching lines, delete matching spans.

struct PatternRefinerConfig {
  std::vector<Regex> drop_lines;
  std::vector<Regex> strip;

  static PatternRefinerConfig from_json(const json& j) {
    PatternRefinerConfig c;
    for (const auto& p : j.value("drop_lines", json::array())) c.drop_lines.emplace_back(p.get<std::string>());
    for (const auto& p : j.value("strip", json::array())) c.strip.emplace_back(p.get<std::string>());
    return c;
  }
};

inline std::string refine_patterns_text(std::string_view text, const PatternRefinerConfig& cfg) {
  std::vector<std::string> kept;
  for (auto& l : detail::split_lines(text)) {
    bool drop = false;
    for (const auto& r : cfg.drop_lines) drop = drop || r.search(l);
    if (!drop) kept.push_back(std::move(l));
  }
  std::string out = detail::join_lines(kept);
  for (const auto& r : cfg.strip) out = r.replace_all(out, "");
  return out;
}

// ---------------------------------------------------------------------------
// Registry

using RefinerFn = std::function<std::string(std::string_view)>;

class RefinerRegistry {
 public:
  void register_refiner(const std::string& source_name, RefinerFn fn) {
    if (!fn) fail(ErrorCode::InvalidArgument, "refiner '" + source_name + "' is empty");
    if (!refiners_.emplace(source_name, std::move(fn)).second)
      fail(ErrorCode::DuplicateName, "refiner '" + source_name + "' already registered");
  }

  /// Built-in news ("news") and court judgment ("court") refiners.
  static RefinerRegistry defaults() {
    RefinerRegistry r;
    r.register_refiner("news", [cfg = NewsRefinerConfig{}](std::string_view t) { return refine_news_text(t, cfg); });
    r.register_refiner("court", [cfg = JudgmentRefinerConfig{}](std::string_view t) {
      return refine_judgment_text(t, cfg);
    });
    return r;
  }

  /// {"news": {"kind": "news", ...}, "court": {"kind": "judgment", ...},
  ///  "<source>": {"kind": "patterns", "drop_lines": [...], "strip": [...]}}
  static RefinerRegistry from_json(const json& j) {
    RefinerRegistry r;
    for (auto& [name, spec] : j.items()) {
      const std::string kind = spec.value("kind", name);
      if (kind == "news") {
        r.register_refiner(name, [cfg = NewsRefinerConfig::from_json(spec)](std::string_view t) {
          return refine_news_text(t, cfg);
        });
      } else if (kind == "judgment" || kind == "court") {
        r.register_refiner(name, [cfg = JudgmentRefinerConfig::from_json(spec)](std::string_view t) {
          return refine_judgment_text(t, cfg);
        });
      } else if (kind == "patterns") {
        r.register_refiner(name, [cfg = PatternRefinerConfig::from_json(spec)](std::string_view t) {
          return refine_patterns_text(t, cfg);
        });
      } else {
        fail(ErrorCode::ConfigInvalid, "unknown refiner kind '" + kind + "'");
      }
    }
    return r;
  }

  bool has(const std::string& source_name) const { return refiners_.count(source_name) > 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : refiners_) out.push_back(k);
    return out;
  }

  /// Applies the refiner registered for the document's source. Unknown
  /// sources pass through with a "no_refiner" note; a judgment without a
  /// skeleton is rejected.
  StageOutcome refine(Document doc) const {
    auto it = refiners_.find(doc.source_name);
    if (it == refiners_.end()) return {std::move(doc), Verdict::kept("no_refiner"), std::nullopt};
    std::string out;
    try {
      out = it->second(doc.text);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MissingSkeleton)
        return {std::move(doc), Verdict::rejected("missing_skeleton"), std::nullopt};
      throw;
    }
    if (detail::is_blank(out)) return {std::move(doc), Verdict::rejected("empty_after_refine"), std::nullopt};
    if (out == doc.text) return {std::move(doc), Verdict::kept(it->first), std::nullopt};
    doc.set_text(std::move(out));
    const std::string name = it->first;
    return {std::move(doc), Verdict::modified(name), std::nullopt};
  }

 private:
  std::map<std::string, RefinerFn> refiners_;
};

}  // namespace kcurate
