#pragma once

// Long-context sampling: length buckets with per-language quotas, decile
// mini-context windows, exponentially weighted anchor draws, and the
// judge-score gate for generated QA pairs.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kcurate/classify.hpp"
#include "kcurate/corpus.hpp"
#include "kcurate/error.hpp"
#include "kcurate/hashing.hpp"
#include "kcurate/log.hpp"
#include "kcurate/parallel.hpp"
#include "kcurate/rng.hpp"
#include "kcurate/tokenizer.hpp"
#include "kcurate/utf8.hpp"

namespace kcurate {

// ---------------------------------------------------------------------------
// Buckets

struct BucketPlan {
  std::size_t unit = 1024;  // "K"; 1000 is the decimal reading
  std::size_t min_units = 4;
  std::size_t max_units = 32;
  std::size_t quota = 2200;  // per (bucket, language)
  std::vector<Language> languages{Language::Korean, Language::English};

  void check() const {
    if (unit == 0 || min_units == 0 || max_units < min_units)
      fail(ErrorCode::ConfigInvalid, "bucket plan needs 0 < min_units <= max_units and unit > 0");
    if (quota == 0) fail(ErrorCode::ConfigInvalid, "bucket quota must be positive");
    if (languages.empty()) fail(ErrorCode::ConfigInvalid, "bucket plan needs a language");
  }

  std::vector<std::size_t> lengths() const {
    std::vector<std::size_t> out;
    for (std::size_t m = min_units; m <= max_units; ++m) out.push_back(m * unit);
    return out;
  }

  /// Largest bucket length <= tokens, if any.
  std::optional<std::size_t> bucket_for(std::size_t tokens) const {
    if (tokens < min_units * unit) return std::nullopt;
    return std::min(tokens / unit, max_units) * unit;
  }

  json to_json() const {
    json langs = json::array();
    for (auto l : languages) langs.push_back(std::string(kcurate::to_string(l)));
    return json{{"unit", unit}, {"lengths", lengths()}, {"quota", quota}, {"languages", langs}};
  }
};

struct BucketedDoc {
  std::string id;
  Language language = Language::Unknown;
  std::size_t tokens = 0;
  std::string text;  // verbatim prefix holding exactly `tokens` tokens
};

struct BucketSkip {
  std::string id;
  std::string reason;  // too_short | language | quota | empty
};

struct BucketizeResult {
  std::map<std::size_t, std::vector<BucketedDoc>> buckets;
  std::vector<BucketSkip> skipped;

  std::size_t count(std::size_t bucket, Language lang) const {
    auto it = buckets.find(bucket);
    if (it == buckets.end()) return 0;
    std::size_t n = 0;
    for (const auto& d : it->second) n += d.language == lang;
    return n;
  }
};

/// Assigns each document to the largest bucket not above its token length
/// and truncates it there. Tokenization runs in parallel; quotas are
/// applied afterwards in input order.
inline BucketizeResult bucketize(std::span<const Document> corpus, const BucketPlan& plan,
                                 const Tokenizer& tokenizer, unsigned workers = 1) {
  plan.check();
  std::vector<std::vector<TokenSpan>> tokens(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) { tokens[i] = tokenizer.tokenize(corpus[i].text); });

  BucketizeResult r;
  std::map<std::pair<std::size_t, Language>, std::size_t> used;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Document& d = corpus[i];
    Language lang = d.tags.language;
    if (lang == Language::Unknown && !utf8::normalize_for_features(d.text).empty())
      lang = detect_language(d.text).language;
    if (std::find(plan.languages.begin(), plan.languages.end(), lang) == plan.languages.end()) {
      r.skipped.push_back({d.id, "language"});
      continue;
    }
    const auto bucket = plan.bucket_for(tokens[i].size());
    if (!bucket) {
      log().debug("longctx: '{}' has {} tokens, below the smallest bucket", d.id, tokens[i].size());
      r.skipped.push_back({d.id, "too_short"});
      continue;
    }
    auto& n = used[{*bucket, lang}];
    if (n >= plan.quota) {
      r.skipped.push_back({d.id, "quota"});
      continue;
    }
    ++n;
    r.buckets[*bucket].push_back({d.id, lang, *bucket, d.text.substr(0, tokens[i][*bucket - 1].end)});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Mini-contexts

inline constexpr int kAnchorCount = 11;  // 0%, 10%, ..., 100%

struct MiniContext {
  std::string parent_id;
  int anchor_index = 0;            // first anchor mapping to this start
  std::vector<int> anchors;        // all anchors merged into this window
  std::size_t start_token = 0;
  std::size_t window = 0;          // min(400, T)
};

/// start = round(i/10 · (T − W)) with halves rounded up, in integers.
inline std::size_t anchor_start(int anchor, std::size_t total, std::size_t window) {
  const std::size_t span = total - window;
  const std::size_t num = static_cast<std::size_t>(anchor) * span;
  return num / 10 + (num % 10 >= 5 ? 1 : 0);
}

inline std::vector<MiniContext> extract_mini_contexts(std::size_t total_tokens, std::size_t window = 400,
                                                      std::string parent_id = {}) {
  if (total_tokens == 0) fail(ErrorCode::EmptyDocument, "cannot extract windows from an empty document");
  if (window == 0) fail(ErrorCode::InvalidArgument, "window must be positive");
  const std::size_t w = std::min(window, total_tokens);
  std::vector<MiniContext> out;
  for (int i = 0; i < kAnchorCount; ++i) {
    const std::size_t s = anchor_start(i, total_tokens, w);
    if (!out.empty() && out.back().start_token == s) {
      out.back().anchors.push_back(i);
      continue;
    }
    out.push_back({parent_id, i, {i}, s, w});
  }
  return out;
}

struct MiniContextText {
  MiniContext context;
  std::string text;  // verbatim slice of the parent
};

inline std::vector<MiniContextText> extract_mini_context_texts(const Document& doc, const Tokenizer& tokenizer,
                                                               std::size_t window = 400) {
  const auto tokens = tokenizer.tokenize(doc.text);
  std::vector<MiniContextText> out;
  for (auto& mc : extract_mini_contexts(tokens.size(), window, doc.id)) {
    const std::size_t b = tokens[mc.start_token].begin;
    const std::size_t e = tokens[mc.start_token + mc.window - 1].end;
    out.push_back({std::move(mc), doc.text.substr(b, e - b)});
  }
  return out;
}

/// Anchor draws with P(i) ∝ exp(lambda·i).
inline std::vector<int> sample_anchors(std::uint64_t seed, std::size_t n_draws, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    fail(ErrorCode::InvalidArgument, "anchor sampling rate must be finite and >= 0");
  std::array<double, kAnchorCount> cdf{};
  double total = 0.0;
  for (int i = 0; i < kAnchorCount; ++i) {
    total += std::exp(lambda * i);
    cdf[static_cast<std::size_t>(i)] = total;
  }
  Rng rng(seed);
  std::vector<int> out;
  out.reserve(n_draws);
  for (std::size_t d = 0; d < n_draws; ++d) {
    const double u = uniform01(rng) * total;
    int i = 0;
    while (i < kAnchorCount - 1 && cdf[static_cast<std::size_t>(i)] <= u) ++i;
    out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// QA gate

struct QaCandidate {
  std::string context_ref;  // "<parent_id>@<start_token>"
  std::string question;
  std::string answer;
};

class Judge {
 public:
  virtual ~Judge() = default;
  virtual int score(const QaCandidate& qa) const = 0;
};

inline constexpr int kQaMinScore = 9;

inline bool qa_retained(int score) {
  if (score < 0 || score > 10)
    fail(ErrorCode::JudgeOutOfRange, "judge score " + std::to_string(score) + " outside 0..10");
  return score >= kQaMinScore;
}

struct QaGateResult {
  std::vector<QaCandidate> retained;
  std::vector<int> scores;
  std::array<std::size_t, 11> histogram{};
  double retention_rate = 0.0;
};

inline QaGateResult gate_qa(const std::vector<QaCandidate>& candidates, const Judge& judge, unsigned workers = 1) {
  QaGateResult r;
  r.scores.resize(candidates.size());
  parallel_for(candidates.size(), workers, [&](std::size_t i) { r.scores[i] = judge.score(candidates[i]); });
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (qa_retained(r.scores[i])) r.retained.push_back(candidates[i]);
    ++r.histogram[static_cast<std::size_t>(r.scores[i])];
  }
  r.retention_rate = candidates.empty() ? 0.0 : static_cast<double>(r.retained.size()) / candidates.size();
  log().info("qa gate: retained {}/{} ({:.3f})", r.retained.size(), candidates.size(), r.retention_rate);
  return r;
}

/// Scores 10 when the answer occurs verbatim in the referenced context,
/// otherwise 4.
class SubstringJudge : public Judge {
 public:
  explicit SubstringJudge(std::map<std::string, std::string> contexts) : contexts_(std::move(contexts)) {}
  int score(const QaCandidate& qa) const override {
    auto it = contexts_.find(qa.context_ref);
    if (it == contexts_.end() || qa.answer.empty()) return 0;
    return it->second.find(qa.answer) != std::string::npos ? 10 : 4;
  }

 private:
  std::map<std::string, std::string> contexts_;
};

}  // namespace kcurate
