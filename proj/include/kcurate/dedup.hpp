#pragma once

// Corpus-level near-duplicate removal over TF-IDF vectors of character
// n-grams, and within-document line/paragraph de-duplication.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kcurate/corpus.hpp"
#include "kcurate/error.hpp"
#include "kcurate/hashing.hpp"
#include "kcurate/parallel.hpp"
#include "kcurate/text.hpp"
#include "kcurate/utf8.hpp"

namespace kcurate {

using TermId = std::uint64_t;

struct DedupConfig {
  double tau = 0.85;
  int ngram = 3;
  std::size_t exact_pairwise_limit = 2000;
  std::size_t candidate_terms = 8;  // top-idf terms indexed in approximate mode
  unsigned workers = 1;

  void check() const {
    if (!(tau > 0.0 && tau <= 1.0)) fail(ErrorCode::ConfigInvalid, "dedup tau must be in (0, 1]");
    if (ngram < 1) fail(ErrorCode::ConfigInvalid, "dedup n-gram order must be positive");
    if (candidate_terms == 0) fail(ErrorCode::ConfigInvalid, "candidate_terms must be positive");
  }
};

/// Similarities this close below tau still count as reaching it, so that
/// identical documents meet tau = 1 despite rounding in the norms.
inline constexpr double kSimilarityTolerance = 1e-12;

inline bool reaches(double similarity, double tau) {
  return similarity >= tau - kSimilarityTolerance;
}

struct TfIdfVector {
  SparseVector<TermId> entries;
  double norm = 0.0;

  bool empty() const { return entries.empty(); }
};

/// Term counts of one document: sorted (term, tf) pairs.
using TermCounts = std::vector<std::pair<TermId, std::uint32_t>>;

inline TermCounts count_terms(std::string_view text, int ngram) {
  const std::u32string norm = utf8::normalize_for_features(text);
  std::vector<TermId> ids;
  if (norm.size() >= static_cast<std::size_t>(ngram)) {
    ids.reserve(norm.size() - ngram + 1);
    for (std::size_t i = 0; i + ngram <= norm.size(); ++i)
      ids.push_back(hash_codepoints(std::u32string_view(norm).substr(i, ngram)));
  }
  std::sort(ids.begin(), ids.end());
  TermCounts out;
  for (TermId id : ids) {
    if (!out.empty() && out.back().first == id)
      ++out.back().second;
    else
      out.emplace_back(id, 1);
  }
  return out;
}

/// Document frequencies over a corpus; idf = ln(N / df).
class IdfTable {
 public:
  void add_document(const TermCounts& counts) {
    ++n_docs_;
    for (const auto& [term, tf] : counts) ++df_[term];
  }

  std::size_t documents() const { return n_docs_; }

  std::uint32_t df(TermId term) const {
    auto it = df_.find(term);
    return it == df_.end() ? 0 : it->second;
  }

  double idf(TermId term) const {
    const auto d = df(term);
    if (d == 0 || n_docs_ == 0) return 0.0;
    return std::log(static_cast<double>(n_docs_) / static_cast<double>(d));
  }

 private:
  std::unordered_map<TermId, std::uint32_t> df_;
  std::size_t n_docs_ = 0;
};

/// weight = tf * idf; zero-weight terms (df = N) are dropped.
inline TfIdfVector weigh(const TermCounts& counts, const IdfTable& idf) {
  TfIdfVector v;
  double sum = 0.0;
  for (const auto& [term, tf] : counts) {
    const double w = tf * idf.idf(term);
    if (w <= 0.0) continue;
    v.entries.entries.emplace_back(term, w);
    sum += w * w;
  }
  v.norm = std::sqrt(sum);
  return v;
}

inline std::vector<TermCounts> count_corpus_terms(std::span<const Document> corpus, const DedupConfig& cfg) {
  std::vector<TermCounts> counts(corpus.size());
  parallel_for(corpus.size(), cfg.workers,
               [&](std::size_t i) { counts[i] = count_terms(corpus[i].text, cfg.ngram); });
  return counts;
}

inline std::vector<TfIdfVector> weigh_all(const std::vector<TermCounts>& counts, const IdfTable& idf,
                                          std::size_t workers) {
  std::vector<TfIdfVector> out(counts.size());
  parallel_for(counts.size(), workers, [&](std::size_t i) { out[i] = weigh(counts[i], idf); });
  return out;
}

/// idf comes from the corpus itself; pass `idf_out` to keep the table.
inline std::vector<TfIdfVector> vectorize(std::span<const Document> corpus, const DedupConfig& cfg = {},
                                          IdfTable* idf_out = nullptr) {
  if (corpus.empty()) fail(ErrorCode::EmptyCorpus, "cannot vectorize an empty corpus");
  cfg.check();
  const auto counts = count_corpus_terms(corpus, cfg);
  IdfTable idf;
  for (const auto& c : counts) idf.add_document(c);
  auto out = weigh_all(counts, idf, cfg.workers);
  if (idf_out) *idf_out = std::move(idf);
  return out;
}

/// Weights against an existing table, e.g. one from an earlier pass.
inline std::vector<TfIdfVector> vectorize(std::span<const Document> corpus, const IdfTable& idf,
                                          const DedupConfig& cfg = {}) {
  if (corpus.empty()) fail(ErrorCode::EmptyCorpus, "cannot vectorize an empty corpus");
  cfg.check();
  return weigh_all(count_corpus_terms(corpus, cfg), idf, cfg.workers);
}

/// Cosine similarity in [0, 1] for nonnegative weights; 0 when either
/// vector is empty.
inline double cosine(const TfIdfVector& a, const TfIdfVector& b) {
  if (a.empty() || b.empty() || a.norm <= 0.0 || b.norm <= 0.0) return 0.0;
  const double c = a.entries.dot(b.entries) / (a.norm * b.norm);
  return std::clamp(c, 0.0, 1.0);
}

struct DuplicateRecord {
  std::string id;
  std::string duplicate_of;
  double similarity = 0.0;

  bool operator==(const DuplicateRecord&) const = default;
};

inline json to_json(const DuplicateRecord& r) {
  return json{{"id", r.id}, {"duplicate_of", r.duplicate_of}, {"similarity", r.similarity}};
}

/// Sequential first-seen-wins scan. Each offered document is compared
/// against the documents kept so far; it is a duplicate when its best
/// similarity reaches tau, and `duplicate_of` names the most similar kept
/// document (earliest on ties). Documents whose vectors are both empty are
/// compared by exact normalized text instead.
class DedupScanner {
 public:
  DedupScanner(DedupConfig cfg, bool exact) : cfg_(std::move(cfg)), exact_(exact) { cfg_.check(); }

  bool exact() const { return exact_; }

  std::optional<DuplicateRecord> offer(const std::string& id, std::string_view text,
                                       TfIdfVector vec) {
    if (vec.empty()) {
      std::string key = utf8::encode(utf8::normalize_for_features(text));
      auto it = empty_keys_.find(key);
      if (it != empty_keys_.end()) return DuplicateRecord{id, it->second, 1.0};
      empty_keys_.emplace(std::move(key), id);
      return std::nullopt;
    }
    std::optional<std::size_t> best;
    double best_sim = -1.0;
    auto consider = [&](std::size_t k) {
      const double s = cosine(vec, kept_[k]);
      if (s > best_sim) {
        best_sim = s;
        best = k;
      }
    };
    std::vector<TermId> keys;
    if (exact_) {
      for (std::size_t k = 0; k < kept_.size(); ++k) consider(k);
    } else {
      keys = top_terms(vec);
      std::vector<std::size_t> candidates;
      for (TermId t : keys) {
        auto it = postings_.find(t);
        if (it != postings_.end())
          candidates.insert(candidates.end(), it->second.begin(), it->second.end());
      }
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
      for (std::size_t k : candidates) consider(k);
    }
    if (best && reaches(best_sim, cfg_.tau)) return DuplicateRecord{id, kept_ids_[*best], best_sim};
    add_kept(id, std::move(vec), std::move(keys));
    return std::nullopt;
  }

  /// Registers a document as kept without testing it (prior corpus).
  void force_keep(const std::string& id, std::string_view text, TfIdfVector vec) {
    if (vec.empty()) {
      empty_keys_.emplace(utf8::encode(utf8::normalize_for_features(text)), id);
      return;
    }
    add_kept(id, std::move(vec), {});
  }

 private:
  std::vector<TermId> top_terms(const TfIdfVector& v) const {
    // Rarest terms have the largest weight per occurrence; rank by weight,
    // then by term id for a total order.
    std::vector<std::pair<double, TermId>> ranked;
    ranked.reserve(v.entries.entries.size());
    for (const auto& [t, w] : v.entries.entries) ranked.emplace_back(w, t);
    const std::size_t k = std::min(cfg_.candidate_terms, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + k, ranked.end(),
                      [](const auto& a, const auto& b) {
                        return a.first != b.first ? a.first > b.first : a.second < b.second;
                      });
    std::vector<TermId> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(ranked[i].second);
    return out;
  }

  void add_kept(const std::string& id, TfIdfVector vec, std::vector<TermId> keys) {
    const std::size_t idx = kept_.size();
    if (!exact_) {
      if (keys.empty()) keys = top_terms(vec);
      for (TermId t : keys) postings_[t].push_back(idx);
    }
    kept_.push_back(std::move(vec));
    kept_ids_.push_back(id);
  }

  DedupConfig cfg_;
  bool exact_;
  std::vector<TfIdfVector> kept_;
  std::vector<std::string> kept_ids_;
  std::unordered_map<TermId, std::vector<std::size_t>> postings_;
  std::unordered_map<std::string, std::string> empty_keys_;
};

struct DedupResult {
  std::vector<Document> kept;
  std::vector<DuplicateRecord> rejected;
  IdfTable idf;  // the table the vectors were weighted with
};

/// Exact all-pairs comparison when the corpus is within
/// exact_pairwise_limit, top-idf candidate lookup above it. With `idf`
/// the weights come from that table instead of the corpus, so re-running
/// on `kept` with the returned table reproduces the same similarities.
inline DedupResult dedup_corpus(std::vector<Document> corpus, const DedupConfig& cfg = {},
                                const IdfTable* idf = nullptr) {
  if (corpus.empty()) fail(ErrorCode::EmptyCorpus, "cannot deduplicate an empty corpus");
  DedupResult out;
  std::vector<TfIdfVector> vecs;
  if (idf) {
    vecs = vectorize(corpus, *idf, cfg);
    out.idf = *idf;
  } else {
    vecs = vectorize(corpus, cfg, &out.idf);
  }
  DedupScanner scanner(cfg, corpus.size() <= cfg.exact_pairwise_limit);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto dup = scanner.offer(corpus[i].id, corpus[i].text, std::move(vecs[i]));
    if (dup)
      out.rejected.push_back(std::move(*dup));
    else
      out.kept.push_back(std::move(corpus[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Line-level de-duplication

struct LineDedupStats {
  std::size_t lines_dropped = 0;
  std::size_t paragraphs_dropped = 0;
};

namespace detail {

inline bool is_blank_line(std::string_view line) {
  for (char32_t c : utf8::decode(line))
    if (!utf8::is_whitespace(c)) return false;
  return true;
}


}  // namespace detail

/// Removes repeated blank-line-delimited paragraphs, then repeated lines,
/// keeping the first occurrence of each. Lines are compared after trimming
/// and collapsing whitespace; blank lines are separators and never dropped
/// on their own.
inline std::string dedup_lines_text(std::string_view text, LineDedupStats* stats = nullptr) {
  std::string_view body = text;
  const bool trailing_newline = !body.empty() && body.back() == '\n';
  if (trailing_newline) body.remove_suffix(1);
  const std::vector<std::string> lines = detail::split_lines(body);

  struct Block {
    std::vector<std::string> lines;
    bool blank = false;
    bool dropped = false;
  };
  std::vector<Block> blocks;
  for (const auto& line : lines) {
    const bool blank = detail::is_blank_line(line);
    if (blocks.empty() || blocks.back().blank != blank) blocks.push_back(Block{{}, blank, false});
    blocks.back().lines.push_back(line);
  }

  LineDedupStats st;
  std::unordered_set<std::string> seen_paragraphs;
  for (auto& b : blocks) {
    if (b.blank) continue;
    std::string key;
    for (const auto& l : b.lines) key += utf8::collapse_whitespace(l) + '\n';
    if (!seen_paragraphs.insert(key).second) {
      b.dropped = true;
      ++st.paragraphs_dropped;
    }
  }
  std::unordered_set<std::string> seen_lines;
  for (auto& b : blocks) {
    if (b.blank || b.dropped) continue;
    std::vector<std::string> kept;
    for (auto& l : b.lines) {
      if (seen_lines.insert(utf8::collapse_whitespace(l)).second)
        kept.push_back(std::move(l));
      else
        ++st.lines_dropped;
    }
    b.lines = std::move(kept);
    if (b.lines.empty()) b.dropped = true;
  }
  if (stats) *stats = st;
  if (st.lines_dropped == 0 && st.paragraphs_dropped == 0) return std::string(text);

  std::vector<std::string> out;
  bool any_kept = false;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    if (b.blank) {
      const bool leading = i == 0;
      const bool trailing = i + 1 == blocks.size();
      if (leading || trailing) out.insert(out.end(), b.lines.begin(), b.lines.end());
      continue;
    }
    if (b.dropped) continue;
    if (any_kept && i > 0 && blocks[i - 1].blank)
      out.insert(out.end(), blocks[i - 1].lines.begin(), blocks[i - 1].lines.end());
    out.insert(out.end(), b.lines.begin(), b.lines.end());
    any_kept = true;
  }
  std::string result;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i) result.push_back('\n');
    result += out[i];
  }
  if (trailing_newline) result.push_back('\n');
  return result;
}

/// Line-level pass on a document: Modified when anything was dropped.
inline StageOutcome dedup_lines(Document doc) {
  LineDedupStats st;
  std::string text = dedup_lines_text(doc.text, &st);
  if (st.lines_dropped == 0 && st.paragraphs_dropped == 0) return {std::move(doc), Verdict::kept(), std::nullopt};
  doc.set_text(std::move(text));
  return {std::move(doc),
          Verdict::modified("dropped " + std::to_string(st.lines_dropped) + " lines, " +
                            std::to_string(st.paragraphs_dropped) + " paragraphs"),
          std::nullopt};
}

}  // namespace kcurate
